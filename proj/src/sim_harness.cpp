#include "fsfbmc/sim_harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fsfbmc/fsfbmc_modem.hpp"
#include "fsfbmc/prototype_filter.hpp"
#include "fsfbmc/rng.hpp"

namespace fsfbmc {
namespace {

enum SeedPurpose : std::uint64_t { kChannelDraw = 0, kDataBits = 1, kNoise = 2 };

std::vector<std::uint8_t> random_bits(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.raw() >> 63);
    return bits;
}

struct FrameOutcome {
    long bits = 0;
    long errors = 0;
};

// Everything a trial needs that does not depend on the frame index.
struct TrialSetup {
    SimConfig cfg;
    SchemeSpec scheme;
    PrototypeFilter filter;
    FsFbmcModem modem;
    DelayProfile profile;
    std::vector<std::uint8_t> mask;
    int activeCount = 0;
    long capacityBits = 0;   // mapped bits per frame
    long infoBits = 0;       // info bits per frame when coded
    double activeFraction = 0.0;

    explicit TrialSetup(const SimConfig& c)
        : cfg(c),
          scheme(parse_scheme(c.scheme, c.nIter)),
          filter(design_phydyas(c.M, c.K)),
          modem(filter, c.fftFactor),
          profile(preset_profile(c.channelModel)),
          mask(c.activeMask.empty() ? default_active_mask(c.M) : c.activeMask) {
        if (static_cast<int>(mask.size()) != c.M)
            throw std::invalid_argument("active mask length must equal M");
        activeCount = static_cast<int>(std::count(mask.begin(), mask.end(), 1));
        if (activeCount == 0) throw std::invalid_argument("no active subchannels");
        const int bps = c.qamOrder == 16 ? 4 : 6;
        capacityBits = static_cast<long>(activeCount) * c.qamSymbols * c.L * bps;
        infoBits = c.coded ? frame_info_bits(capacityBits) : capacityBits;
        activeFraction = static_cast<double>(activeCount) / c.M;
    }
};

// bits -> complex grid, stream-major then subchannel then time
ComplexGrid map_to_grid(const TrialSetup& s, const std::vector<std::uint8_t>& bits) {
    const std::vector<cd> syms = qam_map(bits, s.cfg.qamOrder);
    ComplexGrid grid(s.cfg.L, s.cfg.M, s.cfg.qamSymbols);
    std::size_t pos = 0;
    for (int l = 0; l < s.cfg.L; ++l)
        for (int m = 0; m < s.cfg.M; ++m) {
            if (!s.mask[m]) continue;
            for (int n = 0; n < s.cfg.qamSymbols; ++n) grid.at(l, m, n) = syms[pos++];
        }
    return grid;
}

// complex estimates + per-(m, l) variances -> LLRs in mapping order
std::vector<double> demap_grid(const TrialSetup& s, const ComplexGrid& est,
                               const std::vector<double>& noiseVar) {
    std::vector<cd> syms;
    std::vector<double> vars;
    syms.reserve(static_cast<std::size_t>(s.activeCount) * s.cfg.L * s.cfg.qamSymbols);
    for (int l = 0; l < s.cfg.L; ++l)
        for (int m = 0; m < s.cfg.M; ++m) {
            if (!s.mask[m]) continue;
            const double v = noiseVar[static_cast<std::size_t>(m) * s.cfg.L + l];
            for (int n = 0; n < s.cfg.qamSymbols; ++n) {
                syms.push_back(est.at(l, m, n));
                vars.push_back(v);
            }
        }
    return qam_demap(syms, s.cfg.qamOrder, vars);
}

FrameOutcome run_frame(const TrialSetup& s, double sigmaN2, std::size_t snrIndex,
                       long frameIndex) {
    const std::uint64_t chSeed =
        derive_seed(s.cfg.masterSeed, snrIndex, static_cast<std::uint64_t>(frameIndex),
                    kChannelDraw);
    const std::uint64_t bitSeed =
        derive_seed(s.cfg.masterSeed, snrIndex, static_cast<std::uint64_t>(frameIndex),
                    kDataBits);
    const std::uint64_t noiseSeed =
        derive_seed(s.cfg.masterSeed, snrIndex, static_cast<std::uint64_t>(frameIndex),
                    kNoise);

    const ChannelFrequencyResponse ch =
        realize_channel(s.profile, s.cfg.Nr, s.cfg.Nt, s.modem.fft_size(), chSeed);
    const double sampleNoiseVar = sigmaN2 * s.activeFraction;

    std::vector<std::uint8_t> tx = random_bits(static_cast<std::size_t>(s.infoBits), bitSeed);
    std::vector<std::uint8_t> mapped;
    if (s.cfg.coded) {
        mapped = encode_frame(tx);
        mapped.resize(static_cast<std::size_t>(s.capacityBits), 0);  // exact fit for the default numerology
    } else {
        mapped = tx;
    }

    const ComplexGrid grid = map_to_grid(s, mapped);
    ComplexGrid est;
    std::vector<double> noiseVar;
    if (s.scheme.ofdm) {
        OfdmFrameResult r =
            ofdm_svd_link(s.modem, grid, s.mask, ch, sampleNoiseVar, noiseSeed);
        est = std::move(r.symbols);
        noiseVar = std::move(r.noiseVar);
    } else {
        const PamGrid pam = oqam_stagger(grid, s.mask);
        FbmcFrameResult r =
            fbmc_link(s.modem, pam, ch, s.scheme.granularity, s.scheme.smoothing,
                      s.scheme.scramble, sampleNoiseVar, noiseSeed);
        est = std::move(r.symbols);
        noiseVar = std::move(r.noiseVar);
    }

    const std::vector<double> llrs = demap_grid(s, est, noiseVar);
    FrameOutcome out;
    if (s.cfg.coded) {
        const long codedLen = ((s.infoBits + 6) * 3 + 1) / 2;
        std::vector<double> frameLlrs(llrs.begin(), llrs.begin() + codedLen);
        const std::vector<std::uint8_t> rx = decode_frame(frameLlrs);
        out.bits = s.infoBits;
        for (long i = 0; i < s.infoBits; ++i) out.errors += rx[i] != tx[i];
    } else {
        out.bits = s.capacityBits;
        for (long i = 0; i < s.capacityBits; ++i)
            out.errors += (llrs[i] < 0.0 ? 1 : 0) != tx[i];
    }
    return out;
}

std::vector<BerRecord> sweep(const SimConfig& cfg, bool parallel) {
    if (cfg.snrGridDb.empty()) throw std::invalid_argument("empty SNR grid");
    const TrialSetup setup(cfg);
    const long blockSize = 20;

    std::vector<BerRecord> records;
    for (std::size_t si = 0; si < cfg.snrGridDb.size(); ++si) {
        const double sigmaN2 = snr_to_noise_variance(cfg.snrGridDb[si], cfg.Nt);
        BerRecord rec;
        rec.snrDb = cfg.snrGridDb[si];
        long frame = 0;
        while (frame < cfg.framesPerPoint) {
            const long count = std::min(blockSize, cfg.framesPerPoint - frame);
            std::vector<FrameOutcome> block(count);
            if (parallel) {
                const int nThreads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nThreads)
                for (long f = 0; f < count; ++f)
                    block[f] = run_frame(setup, sigmaN2, si, frame + f);
            } else {
                for (long f = 0; f < count; ++f)
                    block[f] = run_frame(setup, sigmaN2, si, frame + f);
            }
            for (const auto& o : block) {
                rec.bits += o.bits;
                rec.errors += o.errors;
                ++rec.frames;
            }
            frame += count;
            if (rec.errors >= cfg.stopErrors && rec.frames >= cfg.minFrames) break;
        }
        rec.ber = rec.bits > 0 ? static_cast<double>(rec.errors) / rec.bits : 0.0;
        rec.wilsonHalfWidth = wilson_half_width(rec.errors, rec.bits);
        records.push_back(rec);
    }
    return records;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::vector<std::uint8_t> default_active_mask(int M) {
    std::vector<std::uint8_t> mask(M, 0);
    for (int j = 1; j <= 26; ++j) {
        if (j == 7 || j == 21) continue;
        if (j >= M / 2) throw std::invalid_argument("band plan needs at least 64 subchannels");
        mask[j] = 1;
        mask[M - j] = 1;
    }
    return mask;
}

std::string SimConfig::digest() const {
    std::ostringstream ss;
    ss << scheme << "/" << (coded ? "coded" : "uncoded") << qamOrder << "/model-"
       << channelModel << "/fft" << (fftFactor > 0 ? fftFactor : K) << "M" << M
       << "/" << Nt << "x" << Nr << "s" << L << "i" << nIter << "/seed" << masterSeed;
    return ss.str();
}

double wilson_half_width(long errors, long bits) {
    if (bits <= 0) return 0.0;
    const double z = 1.959963984540054;
    const double n = static_cast<double>(bits);
    const double p = static_cast<double>(errors) / n;
    return z / (1.0 + z * z / n) *
           std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
}

std::vector<BerRecord> run_ber_sweep(const SimConfig& cfg) { return sweep(cfg, true); }

std::vector<BerRecord> run_ber_sweep_serial(const SimConfig& cfg) {
    return sweep(cfg, false);
}

long DistanceHistogram::total() const {
    long t = underflow + overflow;
    for (long c : counts) t += c;
    return t;
}

double DistanceHistogram::mass_above(double threshold) const {
    if (distances.empty()) return 0.0;
    long above = 0;
    for (double d : distances) above += d > threshold;
    return static_cast<double>(above) / static_cast<double>(distances.size());
}

DistanceHistogram beamformer_distance_histogram(const SimConfig& cfg,
                                                const SmoothingMethod& method,
                                                bool scramble, long draws,
                                                const std::vector<double>& edges) {
    if (edges.size() < 2) throw std::invalid_argument("need at least two histogram edges");
    if (!std::is_sorted(edges.begin(), edges.end()))
        throw std::invalid_argument("histogram edges must be ascending");
    const TrialSetup setup(cfg);
    const std::vector<int> tones = setup.modem.active_tones(setup.mask);

    DistanceHistogram hist;
    hist.edges = edges;
    hist.counts.assign(edges.size() - 1, 0);
    for (long d = 0; d < draws; ++d) {
        const std::uint64_t seed =
            derive_seed(cfg.masterSeed, 0, static_cast<std::uint64_t>(d), kChannelDraw);
        const ChannelFrequencyResponse ch =
            realize_channel(setup.profile, cfg.Nr, cfg.Nt, setup.modem.fft_size(), seed);
        BeamformerSet bf = smooth_sweep(ch, tones, method, cfg.L);
        if (scramble) scramble_phases(bf);
        for (std::size_t i = 1; i < bf.entries.size(); ++i) {
            const double dist = (bf.entries[i].V - bf.entries[i - 1].V).norm();
            hist.distances.push_back(dist);
            if (dist < edges.front()) {
                ++hist.underflow;
            } else if (dist >= edges.back()) {
                ++hist.overflow;
            } else {
                const auto it = std::upper_bound(edges.begin(), edges.end(), dist);
                ++hist.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
            }
        }
    }
    return hist;
}

double histogram_total_variation(const DistanceHistogram& a, const DistanceHistogram& b) {
    if (a.edges != b.edges)
        throw std::invalid_argument("histograms use different binnings");
    const double na = static_cast<double>(a.total());
    const double nb = static_cast<double>(b.total());
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("empty histogram");
    double tv = std::abs(a.underflow / na - b.underflow / nb) +
                std::abs(a.overflow / na - b.overflow / nb);
    for (std::size_t i = 0; i < a.counts.size(); ++i)
        tv += std::abs(a.counts[i] / na - b.counts[i] / nb);
    return tv / 2.0;
}

std::vector<double> measure_leaked_interference(const SimConfig& cfg,
                                                const LeakProbe& probe, long draws) {
    const TrialSetup setup(cfg);
    if (setup.scheme.ofdm)
        throw std::invalid_argument("leak probing applies to the FBMC schemes");
    if (probe.m < 0 || probe.m >= cfg.M || !setup.mask[probe.m])
        throw std::invalid_argument("probe subchannel must be active");
    const int halfTimes = 2 * cfg.qamSymbols;
    if (probe.n < 0 || probe.n >= halfTimes)
        throw std::invalid_argument("probe half-symbol out of range");

    PamGrid pam(cfg.L, cfg.M, halfTimes);
    pam.activeMask = setup.mask;
    pam.at(probe.stream, probe.m, probe.n) = 1.0;

    // distortion-free reference: same modem, identity channel and beamformers
    const std::vector<int> allTones = [&] {
        std::vector<int> t(setup.modem.fft_size());
        for (int k = 0; k < setup.modem.fft_size(); ++k) t[k] = k;
        return t;
    }();
    // the reference chain has no channel, so its receive side sees Nt antennas
    const BeamformerSet ident = identity_beamformers(
        setup.modem.fft_size(), allTones, cfg.Nt, cfg.Nt, cfg.L);
    const SampleStream refX = setup.modem.modulate(pam, ident);
    const auto ref = setup.modem.demodulate(refX, ident, halfTimes, setup.mask);

    std::vector<double> leak(cfg.M, 0.0);
    for (long d = 0; d < draws; ++d) {
        const std::uint64_t seed =
            derive_seed(cfg.masterSeed, 0, static_cast<std::uint64_t>(d), kChannelDraw);
        const ChannelFrequencyResponse ch =
            realize_channel(setup.profile, cfg.Nr, cfg.Nt, setup.modem.fft_size(), seed);
        const FbmcFrameResult r =
            fbmc_link(setup.modem, pam, ch, setup.scheme.granularity,
                      setup.scheme.smoothing, setup.scheme.scramble, 0.0, 0);
        for (int m = 0; m < cfg.M; ++m) {
            if (!setup.mask[m]) continue;
            double e = 0.0;
            for (int l = 0; l < cfg.L; ++l)
                for (int n = 0; n < halfTimes; ++n) {
                    const double diff = r.pam.at(l, m, n) - ref.pam.at(l, m, n);
                    e += diff * diff;
                }
            leak[m] += e;
        }
    }
    for (double& v : leak) v /= static_cast<double>(draws);
    return leak;
}

std::string ber_csv(const SimConfig& cfg, const std::vector<BerRecord>& records) {
    std::ostringstream out;
    out << "config,snr_db,bits,errors,frames,ber,wilson_half_width\r\n";
    const std::string digest = csv_field(cfg.digest());
    for (const auto& r : records) {
        out << digest << ',' << format_double(r.snrDb) << ',' << r.bits << ','
            << r.errors << ',' << r.frames << ',' << format_double(r.ber) << ','
            << format_double(r.wilsonHalfWidth) << "\r\n";
    }
    return out.str();
}

void write_ber_csv(const std::string& path, const SimConfig& cfg,
                   const std::vector<BerRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << ber_csv(cfg, records);
    if (!out) throw std::runtime_error("short write to " + path);
}

void write_manifest(const std::string& path, const SimConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "scheme=" << cfg.scheme << "\n";
    out << "qam_order=" << cfg.qamOrder << "\n";
    out << "coded=" << (cfg.coded ? 1 : 0) << "\n";
    out << "channel_model=" << cfg.channelModel << "\n";
    out << "subchannels=" << cfg.M << "\n";
    out << "overlap_factor=" << cfg.K << "\n";
    out << "fft_factor=" << (cfg.fftFactor > 0 ? cfg.fftFactor : cfg.K) << "\n";
    out << "nt=" << cfg.Nt << "\n";
    out << "nr=" << cfg.Nr << "\n";
    out << "streams=" << cfg.L << "\n";
    out << "smoothing_iterations=" << cfg.nIter << "\n";
    out << "qam_symbols_per_frame=" << cfg.qamSymbols << "\n";
    out << "frames_per_point=" << cfg.framesPerPoint << "\n";
    out << "stop_errors=" << cfg.stopErrors << "\n";
    out << "min_frames=" << cfg.minFrames << "\n";
    out << "master_seed=" << cfg.masterSeed << "\n";
    out << "threads=" << cfg.threads << "\n";
    out << "snr_grid_db=";
    for (std::size_t i = 0; i < cfg.snrGridDb.size(); ++i)
        out << (i ? " " : "") << format_double(cfg.snrGridDb[i]);
    out << "\n";
    if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace fsfbmc
