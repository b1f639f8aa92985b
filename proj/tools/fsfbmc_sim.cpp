#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "fsfbmc/prototype_filter.hpp"
#include "fsfbmc/sim_harness.hpp"
#include "fsfbmc/svd_smoothing.hpp"

using namespace fsfbmc;

namespace {

std::vector<double> parse_snr_list(const std::vector<std::string>& items) {
    std::vector<double> grid;
    for (const std::string& item : items) {
        std::size_t pos = 0;
        while (pos < item.size()) {
            const std::size_t comma = item.find(',', pos);
            const std::string tok = item.substr(pos, comma == std::string::npos
                                                         ? std::string::npos
                                                         : comma - pos);
            if (!tok.empty()) {
                if (tok == "inf")
                    grid.push_back(std::numeric_limits<double>::infinity());
                else
                    grid.push_back(std::stod(tok));
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    return grid;
}

void print_records(const SimConfig& cfg, const std::vector<BerRecord>& records) {
    std::printf("# %s\n", cfg.digest().c_str());
    std::printf("%10s %12s %10s %8s %12s %12s\n", "snr_db", "bits", "errors",
                "frames", "ber", "wilson_hw");
    for (const auto& r : records)
        std::printf("%10.4g %12ld %10ld %8ld %12.6g %12.4g\n", r.snrDb, r.bits,
                    r.errors, r.frames, r.ber, r.wilsonHalfWidth);
}

int run_ber(const SimConfig& base, const std::vector<std::string>& snrItems,
            bool serial, const std::string& outPrefix) {
    SimConfig cfg = base;
    cfg.snrGridDb = parse_snr_list(snrItems);
    if (cfg.snrGridDb.empty()) {
        std::cerr << "no SNR points given\n";
        return 1;
    }
    const auto records = serial ? run_ber_sweep_serial(cfg) : run_ber_sweep(cfg);
    print_records(cfg, records);
    if (!outPrefix.empty()) {
        write_ber_csv(outPrefix + ".csv", cfg, records);
        write_manifest(outPrefix + ".manifest", cfg);
        std::printf("wrote %s.csv and %s.manifest\n", outPrefix.c_str(),
                    outPrefix.c_str());
    }
    return 0;
}

int run_hist(const SimConfig& base, const std::string& method, bool scramble,
             long draws, double maxEdge, double step, const std::string& outPath) {
    std::vector<double> edges;
    for (double e = 0.0; e <= maxEdge + 1e-12; e += step) edges.push_back(e);
    const DistanceHistogram h = beamformer_distance_histogram(
        base, parse_smoothing(method, base.nIter), scramble, draws, edges);

    std::printf("# adjacent beamformer distances, %s%s, %ld draws, %ld values\n",
                method.c_str(), scramble ? " scrambled" : "", draws, h.total());
    std::printf("mass_above_1.0 = %.6f\n", h.mass_above(1.0));
    if (!outPath.empty()) {
        FILE* out = std::fopen(outPath.c_str(), "w");
        if (!out) {
            std::cerr << "cannot open " << outPath << "\n";
            return 1;
        }
        std::fprintf(out, "bin_lo,bin_hi,count\n");
        for (std::size_t b = 0; b + 1 < edges.size(); ++b)
            std::fprintf(out, "%.17g,%.17g,%ld\n", edges[b], edges[b + 1], h.counts[b]);
        std::fprintf(out, "%.17g,inf,%ld\n", edges.back(), h.overflow);
        std::fclose(out);
        std::printf("wrote %s\n", outPath.c_str());
    }
    return 0;
}

int run_leak(const SimConfig& base, const LeakProbe& probe, long draws,
             const std::string& outPath) {
    const auto leak = measure_leaked_interference(base, probe, draws);
    std::printf("# leaked real-part interference of a unit probe at (m=%d, n=%d)\n",
                probe.m, probe.n);
    double total = 0.0;
    for (std::size_t m = 0; m < leak.size(); ++m) {
        if (leak[m] > 0.0)
            std::printf("m=%2zu  %.6e\n", m, leak[m]);
        total += leak[m];
    }
    std::printf("total = %.6e\n", total);
    if (!outPath.empty()) {
        FILE* out = std::fopen(outPath.c_str(), "w");
        if (!out) {
            std::cerr << "cannot open " << outPath << "\n";
            return 1;
        }
        std::fprintf(out, "subchannel,leak_power\n");
        for (std::size_t m = 0; m < leak.size(); ++m)
            std::fprintf(out, "%zu,%.17g\n", m, leak[m]);
        std::fclose(out);
        std::printf("wrote %s\n", outPath.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FS-FBMC/OQAM MIMO link simulator"};
    app.require_subcommand(1);
    app.set_config("--config");

    SimConfig cfg;
    auto addCommon = [&cfg](CLI::App* cmd) {
        cmd->add_option("--scheme", cfg.scheme,
                        "ofdm, subchannel, subchannel-smoothed, tone-unsmoothed, "
                        "tone-ortho, tone-phase");
        cmd->add_option("--order", cfg.qamOrder, "QAM order, 16 or 64");
        cmd->add_flag("--coded,!--uncoded", cfg.coded, "rate-2/3 coded frames");
        cmd->add_option("--channel", cfg.channelModel, "flat, D, E, F, or a profile file");
        cmd->add_option("--subchannels", cfg.M, "subchannel count M");
        cmd->add_option("--overlap", cfg.K, "prototype overlap factor K");
        cmd->add_option("--fft-factor", cfg.fftFactor,
                        "tones per subchannel at the receiver, 0 means K");
        cmd->add_option("--nt", cfg.Nt, "transmit antennas");
        cmd->add_option("--nr", cfg.Nr, "receive antennas");
        cmd->add_option("--streams", cfg.L, "spatial streams");
        cmd->add_option("--niter", cfg.nIter, "orthogonal iteration count");
        cmd->add_option("--symbols", cfg.qamSymbols, "QAM symbols per subchannel per frame");
        cmd->add_option("--frames", cfg.framesPerPoint, "frame budget per SNR point");
        cmd->add_option("--stop-errors", cfg.stopErrors, "early stop error threshold");
        cmd->add_option("--min-frames", cfg.minFrames, "frames required before stopping");
        cmd->add_option("--seed", cfg.masterSeed, "master seed");
        cmd->add_option("--threads", cfg.threads, "worker threads, 0 for the OpenMP default");
    };

    CLI::App* ber = app.add_subcommand("ber", "Monte Carlo BER sweep over an SNR grid");
    addCommon(ber);
    std::vector<std::string> snrItems;
    ber->add_option("--snr", snrItems, "SNR points in dB, comma separated, inf allowed")
        ->required();
    bool serial = false;
    ber->add_flag("--serial", serial, "force the serial reference path");
    std::string outPrefix;
    ber->add_option("--out", outPrefix, "output prefix for .csv and .manifest");

    CLI::App* hist = app.add_subcommand(
        "hist", "adjacent-tone beamformer distance histogram");
    addCommon(hist);
    std::string method = "none";
    bool scramble = false;
    long draws = 200;
    double maxEdge = 3.0, step = 0.05;
    hist->add_option("--method", method, "none, phase, or ortho");
    hist->add_flag("--scramble", scramble, "emulate arbitrary library phases");
    hist->add_option("--draws", draws, "channel draws to pool");
    hist->add_option("--max-edge", maxEdge, "last bin edge");
    hist->add_option("--step", step, "bin width");
    std::string histOut;
    hist->add_option("--out", histOut, "CSV path for the binned counts");

    CLI::App* leak = app.add_subcommand(
        "leak", "leaked real-part interference of a unit probe symbol");
    addCommon(leak);
    LeakProbe probe;
    leak->add_option("--probe-m", probe.m, "probe subchannel");
    leak->add_option("--probe-n", probe.n, "probe half-symbol index");
    leak->add_option("--probe-stream", probe.stream, "probe stream");
    long leakDraws = 10;
    leak->add_option("--draws", leakDraws, "channel draws to average");
    std::string leakOut;
    leak->add_option("--out", leakOut, "CSV path for the per-subchannel powers");

    CLI::App* flops = app.add_subcommand("flops", "per-tone smoothing cost model");
    int fNt = 2, fNr = 2, fIter = 3;
    flops->add_option("--nt", fNt, "transmit antennas");
    flops->add_option("--nr", fNr, "receive antennas");
    flops->add_option("--niter", fIter, "orthogonal iteration count");

    CLI::App* filter = app.add_subcommand("filter", "export prototype filter taps");
    int fM = 64, fK = 4;
    filter->add_option("--subchannels", fM, "subchannel count M");
    filter->add_option("--overlap", fK, "overlap factor K");
    std::string filterOut = "prototype.txt";
    filter->add_option("--out", filterOut, "output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ber->parsed()) return run_ber(cfg, snrItems, serial, outPrefix);
        if (hist->parsed()) return run_hist(cfg, method, scramble, draws, maxEdge,
                                            step, histOut);
        if (leak->parsed()) return run_leak(cfg, probe, leakDraws, leakOut);
        if (flops->parsed()) {
            std::printf("phase factor:          %ld flops/tone\n",
                        flops_estimate(fNt, fNr, {SmoothingKind::phaseFactor, fIter}));
            std::printf("orthogonal iteration:  %ld flops/tone (%d rounds)\n",
                        flops_estimate(fNt, fNr, {SmoothingKind::orthoIter, fIter}),
                        fIter);
            return 0;
        }
        if (filter->parsed()) {
            const PrototypeFilter f = design_phydyas(fM, fK);
            export_coefficients(f, filterOut);
            std::printf("wrote %zu taps to %s\n", f.g.size(), filterOut.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
