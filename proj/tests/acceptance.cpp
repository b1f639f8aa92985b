#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fsfbmc/baselines.hpp"
#include "fsfbmc/channel_model.hpp"
#include "fsfbmc/fsfbmc_modem.hpp"
#include "fsfbmc/prototype_filter.hpp"
#include "fsfbmc/rng.hpp"
#include "fsfbmc/sim_harness.hpp"
#include "fsfbmc/svd_smoothing.hpp"

using namespace fsfbmc;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

Eigen::MatrixXcd random_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXcd H(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) H(r, c) = rng.cgaussian(1.0);
    return H;
}

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

SimConfig coded_config(const std::string& scheme, const std::string& model) {
    SimConfig cfg;
    cfg.scheme = scheme;
    cfg.qamOrder = 64;
    cfg.coded = true;
    cfg.channelModel = model;
    cfg.snrGridDb = {18.0, 20.0, 22.0, 24.0, 26.0};
    cfg.framesPerPoint = 400;
    cfg.stopErrors = 300;
    cfg.minFrames = 20;
    cfg.masterSeed = 1;
    return cfg;
}

// first downward crossing of the target on the descending branch of the
// waterfall, interpolated linearly in log10(ber)
std::optional<double> snr_at_ber(const std::vector<BerRecord>& records, double target) {
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const double hi = records[i].ber;
        const double lo = records[i + 1].ber;
        if (hi >= target && target > lo && lo > 0.0) {
            const double s = (std::log10(target) - std::log10(hi)) /
                             (std::log10(lo) - std::log10(hi));
            return records[i].snrDb + s * (records[i + 1].snrDb - records[i].snrDb);
        }
        if (hi >= target && lo == 0.0) {
            // the next point produced no errors at all; fall back to the
            // resolution limit of one error in that many bits
            const double floorBer = 1.0 / static_cast<double>(records[i + 1].bits);
            const double s = (std::log10(target) - std::log10(hi)) /
                             (std::log10(floorBer) - std::log10(hi));
            return records[i].snrDb + s * (records[i + 1].snrDb - records[i].snrDb);
        }
    }
    return std::nullopt;
}

Verdict check_back_to_back() {
    const PrototypeFilter f = design_phydyas(64, 4);
    const FsFbmcModem modem(f);
    const auto mask = default_active_mask(64);
    const int halfTimes = 14;

    PamGrid pam(1, 64, halfTimes);
    pam.activeMask = mask;
    Rng rng(1);
    for (int m = 0; m < 64; ++m) {
        if (!mask[m]) continue;
        for (int n = 0; n < halfTimes; ++n)
            pam.at(0, m, n) = rng.raw() >> 63 ? 1.0 : -1.0;
    }
    std::vector<int> allTones(modem.fft_size());
    for (int k = 0; k < modem.fft_size(); ++k) allTones[k] = k;
    const BeamformerSet ident = identity_beamformers(modem.fft_size(), allTones, 1, 1, 1);

    const auto demod = modem.demodulate(modem.modulate(pam, ident), ident, halfTimes, mask);
    double sig = 0.0, err = 0.0;
    for (int m = 0; m < 64; ++m) {
        if (!mask[m]) continue;
        for (int n = 0; n < halfTimes; ++n) {
            const double a = pam.at(0, m, n);
            const double d = demod.pam.at(0, m, n) - a;
            sig += a * a;
            err += d * d;
        }
    }
    const double sdr = 10.0 * std::log10(sig / err);
    return {sdr >= 55.0, format("sdr %.2f dB, need >= 55", sdr)};
}

Verdict check_transmux() {
    const PrototypeFilter f = design_phydyas(64, 4);
    const cd origin = transmux_response(f, 0, 0, 0, 0);
    if (std::abs(origin - cd(1, 0)) > 1e-12)
        return {false, format("origin response %.3e away from 1", std::abs(origin - cd(1, 0)))};

    double worstRe = 0.0;
    for (int dm = -8; dm <= 8; ++dm) {
        for (int dn = -7; dn <= 7; ++dn) {
            if (dm == 0 && dn == 0) continue;
            const cd z = transmux_response(f, (dm + 64) % 64, dn + 16, 0, 16);
            worstRe = std::max(worstRe, std::abs(z.real()));
        }
    }
    double worstFar = 0.0;
    for (int dn : {-9, -8, 8, 9}) {
        const cd z = transmux_response(f, 0, dn + 16, 0, 16);
        worstFar = std::max(worstFar, std::abs(z));
    }
    const bool pass = worstRe < 1e-10 && worstFar < 1e-30;
    return {pass, format("max |Re| %.2e (< 1e-10), max beyond support %.2e", worstRe,
                         worstFar)};
}

Verdict check_svd_identities() {
    Rng rng(3);
    double worstDiag = 0.0, worstOrtho = 0.0;
    const int shapes[][2] = {{2, 2}, {3, 2}, {2, 3}, {4, 4}};
    for (int trial = 0; trial < 1000; ++trial) {
        const auto& shape = shapes[trial % 4];
        const int L = std::min(shape[0], shape[1]);
        const Eigen::MatrixXcd H = random_matrix(shape[0], shape[1], rng);
        const SvdTriple t = svd_decompose(H, L);

        worstOrtho = std::max(
            worstOrtho,
            (t.U.adjoint() * t.U - Eigen::MatrixXcd::Identity(L, L)).norm());
        worstOrtho = std::max(
            worstOrtho,
            (t.V.adjoint() * t.V - Eigen::MatrixXcd::Identity(L, L)).norm());

        Eigen::MatrixXcd core = t.U.adjoint() * H * t.V;
        for (int l = 0; l < L; ++l) core(l, l) -= t.D(l);
        worstDiag = std::max(worstDiag, core.norm());
    }
    const bool pass = worstDiag < 1e-8 && worstOrtho < 1e-10;
    return {pass, format("1000 draws, max diag residual %.2e (< 1e-8), max "
                         "orthonormality residual %.2e (< 1e-10)",
                         worstDiag, worstOrtho)};
}

Verdict check_phase_optimality() {
    Rng rng(4);
    double worstBeat = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + trial % 3;
        Eigen::VectorXcd vHat(n), vPrev(n);
        for (int i = 0; i < n; ++i) {
            vHat(i) = rng.cgaussian(1.0);
            vPrev(i) = rng.cgaussian(1.0);
        }
        vHat /= vHat.norm();
        vPrev /= vPrev.norm();
        const double achieved = (phase_align(vHat, vPrev) - vPrev).norm();
        for (int s = 0; s < 4096; ++s) {
            const double theta = 2.0 * kPi * s / 4096.0;
            const double grid = (vHat * std::polar(1.0, theta) - vPrev).norm();
            worstBeat = std::max(worstBeat, achieved - grid);
        }
    }
    return {worstBeat <= 1e-9,
            format("1000 pairs x 4096 phases, worst shortfall %.2e (<= 1e-9)", worstBeat)};
}

Verdict check_perturbation_bounds() {
    Rng rng(5);
    int weylViolations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::MatrixXcd H1 = random_matrix(2, 2, rng);
        const Eigen::MatrixXcd H2 = H1 + 0.1 * random_matrix(2, 2, rng);
        if (!weyl_check(H1, H2).satisfied) ++weylViolations;
    }

    int wedinApplicable = 0, wedinViolations = 0, wedinTrials = 0;
    while (wedinApplicable < 1000 && wedinTrials < 20000) {
        ++wedinTrials;
        const Eigen::MatrixXcd H1 = random_matrix(2, 2, rng);
        const Eigen::MatrixXcd H2 = H1 + 0.05 * random_matrix(2, 2, rng);
        const Eigen::JacobiSVD<Eigen::MatrixXcd> s1(H1);
        const Eigen::JacobiSVD<Eigen::MatrixXcd> s2(H2);
        const double sep =
            std::min(s2.singularValues()(0),
                     std::abs(s2.singularValues()(0) - s1.singularValues()(1)));
        if (sep < 0.1) continue;
        const WedinDiagnostic d = wedin_check(H1, H2, 1, 0.5 * sep);
        if (!d.applicable) continue;
        ++wedinApplicable;
        if (!d.satisfied) ++wedinViolations;
    }
    const bool pass = weylViolations == 0 && wedinViolations == 0 && wedinApplicable == 1000;
    return {pass, format("weyl violations %d/1000, wedin violations %d/%d applicable",
                         weylViolations, wedinViolations, wedinApplicable)};
}

Verdict check_histograms() {
    SimConfig cfg;
    cfg.channelModel = "D";
    cfg.masterSeed = 6;
    std::vector<double> edges;
    for (double e = 0.0; e <= 3.0 + 1e-12; e += 0.05) edges.push_back(e);
    const long draws = 200;

    const DistanceHistogram raw = beamformer_distance_histogram(
        cfg, {SmoothingKind::none, 3}, false, draws, edges);
    const DistanceHistogram phase = beamformer_distance_histogram(
        cfg, {SmoothingKind::phaseFactor, 3}, false, draws, edges);
    const DistanceHistogram ortho = beamformer_distance_histogram(
        cfg, {SmoothingKind::orthoIter, 3}, false, draws, edges);

    const double mRaw = raw.mass_above(1.0);
    const double mPhase = phase.mass_above(1.0);
    const double mOrtho = ortho.mass_above(1.0);
    const double tv = histogram_total_variation(phase, ortho);

    const bool pass = mRaw > 0.01 && mPhase < 0.001 && mOrtho < 0.001 && tv < 0.05;
    return {pass, format("mass above 1.0: raw %.4f (> 0.01), phase %.5f and ortho "
                         "%.5f (< 0.001); tv(phase, ortho) %.4f (< 0.05)",
                         mRaw, mPhase, mOrtho, tv)};
}

Verdict check_scheme_ordering() {
    SimConfig cfg;
    cfg.qamOrder = 64;
    cfg.coded = false;
    cfg.channelModel = "D";
    cfg.snrGridDb = {35.0};
    cfg.framesPerPoint = 250;
    cfg.stopErrors = std::numeric_limits<long>::max();
    cfg.minFrames = 1;
    cfg.masterSeed = 1;

    const char* order[] = {"tone-ortho", "subchannel-smoothed", "subchannel",
                           "tone-unsmoothed"};
    BerRecord rec[4];
    for (int i = 0; i < 4; ++i) {
        cfg.scheme = order[i];
        const auto records = run_ber_sweep(cfg);
        rec[i] = records[0];
        if (rec[i].bits < 1000000)
            return {false, format("%s measured only %ld bits", order[i], rec[i].bits)};
    }
    cfg.scheme = "ofdm";
    const BerRecord ofdm = run_ber_sweep(cfg)[0];

    std::string detail = format("ofdm %.5f", ofdm.ber);
    for (int i = 0; i < 4; ++i)
        detail += format(", %s %.5f", order[i], rec[i].ber);

    if (ofdm.ber > rec[0].ber)
        return {false, detail + "; ofdm fails to lower-bound the filter bank schemes"};
    for (int i = 0; i + 1 < 4; ++i) {
        const double gap = rec[i + 1].ber - rec[i].ber;
        const double need = 3.0 * std::max(rec[i].wilsonHalfWidth,
                                           rec[i + 1].wilsonHalfWidth);
        if (gap <= need)
            return {false, detail + format("; gap %s -> %s is %.2e, need > %.2e",
                                           order[i], order[i + 1], gap, need)};
    }
    return {true, detail + "; all gaps exceed 3 half-widths"};
}

Verdict check_coded_proximity() {
    const auto proposed = run_ber_sweep(coded_config("tone-ortho", "D"));
    const auto reference = run_ber_sweep(coded_config("ofdm", "D"));
    const auto snrP = snr_at_ber(proposed, 1e-3);
    const auto snrR = snr_at_ber(reference, 1e-3);
    if (!snrP || !snrR) return {false, "a curve never crossed ber 1e-3 on the grid"};
    const double gap = std::abs(*snrP - *snrR);
    return {gap <= 1.5, format("snr at ber 1e-3: proposed %.2f dB, ofdm %.2f dB, gap "
                               "%.2f dB (<= 1.5)",
                               *snrP, *snrR, gap)};
}

Verdict check_floor_reduction() {
    SimConfig cfg = coded_config("tone-ortho", "F");
    cfg.snrGridDb = {std::numeric_limits<double>::infinity()};
    cfg.framesPerPoint = 500;
    cfg.stopErrors = std::numeric_limits<long>::max();
    cfg.minFrames = 1;

    const BerRecord coarse = run_ber_sweep(cfg)[0];
    cfg.fftFactor = 8;
    const BerRecord fine = run_ber_sweep(cfg)[0];
    if (fine.ber <= 0.0) return {false, "doubled grid produced no errors to compare"};
    const double ratio = coarse.ber / fine.ber;
    return {ratio >= 2.0, format("noise-free coded floors: 4M %.5f, 8M %.5f, ratio "
                                 "%.2f (>= 2)",
                                 coarse.ber, fine.ber, ratio)};
}

Verdict check_iteration_adequacy() {
    std::string detail;
    bool pass = true;
    for (const char* model : {"D", "E", "F"}) {
        const auto ortho = run_ber_sweep(coded_config("tone-ortho", model));
        const auto phase = run_ber_sweep(coded_config("tone-phase", model));
        const auto snrO = snr_at_ber(ortho, 1e-3);
        const auto snrP = snr_at_ber(phase, 1e-3);
        if (!snrO || !snrP) {
            pass = false;
            detail += format("[%s no crossing] ", model);
            continue;
        }
        const double gap = std::abs(*snrO - *snrP);
        if (gap > 0.3) pass = false;
        detail += format("%s gap %.3f dB; ", model, gap);
    }
    return {pass, detail + "(each <= 0.3)"};
}

Verdict check_flops() {
    const long ortho = flops_estimate(2, 2, {SmoothingKind::orthoIter, 3});
    const long phase = flops_estimate(2, 2, {SmoothingKind::phaseFactor, 3});
    return {ortho == 93 && phase == 168,
            format("orthoIter(3) %ld (= 93), phaseFactor %ld (= 168)", ortho, phase)};
}

Verdict check_determinism() {
    SimConfig cfg;
    cfg.scheme = "tone-ortho";
    cfg.qamOrder = 16;
    cfg.coded = false;
    cfg.channelModel = "D";
    cfg.snrGridDb = {20.0, 30.0};
    cfg.framesPerPoint = 12;
    cfg.stopErrors = std::numeric_limits<long>::max();
    cfg.minFrames = 1;
    cfg.masterSeed = 7;
    cfg.threads = 2;

    const std::string parallel = ber_csv(cfg, run_ber_sweep(cfg));
    const std::string serial = ber_csv(cfg, run_ber_sweep_serial(cfg));
    return {parallel == serial,
            parallel == serial ? "parallel and serial csv byte-identical"
                               : "csv outputs differ between parallel and serial"};
}

struct Criterion {
    const char* name;
    Verdict (*run)();
};

const Criterion kCriteria[] = {
    {"back-to-back-sdr", check_back_to_back},
    {"transmux-imaginarity", check_transmux},
    {"svd-identities", check_svd_identities},
    {"phase-optimality", check_phase_optimality},
    {"perturbation-bounds", check_perturbation_bounds},
    {"distance-histograms", check_histograms},
    {"scheme-ordering", check_scheme_ordering},
    {"coded-proximity", check_coded_proximity},
    {"floor-reduction", check_floor_reduction},
    {"iteration-adequacy", check_iteration_adequacy},
    {"flops-model", check_flops},
    {"determinism", check_determinism},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 12) {
            std::fprintf(stderr, "usage: %s [criterion 1..12]\n", argv[0]);
            return 2;
        }
    }

    int failures = 0;
    for (int i = 0; i < 12; ++i) {
        if (only && only != i + 1) continue;
        const auto start = std::chrono::steady_clock::now();
        const Verdict v = kCriteria[i].run();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        std::printf("C%02d %-22s %s (%s) [%.1fs]\n", i + 1, kCriteria[i].name,
                    v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
        std::fflush(stdout);
        if (!v.pass) ++failures;
    }
    return failures;
}
