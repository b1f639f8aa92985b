#pragma once

#include <string>
#include <vector>

#include "fsfbmc/baselines.hpp"
#include "fsfbmc/channel_model.hpp"
#include "fsfbmc/link_layer.hpp"
#include "fsfbmc/types.hpp"

namespace fsfbmc {

// One BER measurement campaign: a scheme, a modulation, a channel model and
// an SNR grid, driven by a single master seed. Every random draw inside a
// trial is derived from (masterSeed, snr index, frame index, purpose), so
// results do not depend on thread count or scheduling.
struct SimConfig {
    std::string scheme = "tone-ortho";
    int qamOrder = 64;
    bool coded = true;
    std::string channelModel = "D";
    int M = 64;
    int K = 4;
    int fftFactor = 0;      // tones per subchannel; 0 means K
    int Nt = 2;
    int Nr = 2;
    int L = 2;
    int nIter = 3;
    int qamSymbols = 7;     // complex symbols per frame and subchannel
    std::vector<double> snrGridDb;
    long framesPerPoint = 200;
    long stopErrors = 500;  // early stop once both thresholds are met
    long minFrames = 20;
    std::uint64_t masterSeed = 1;
    int threads = 0;        // 0 means the OpenMP default
    std::vector<std::uint8_t> activeMask;  // empty selects the default band plan

    std::string digest() const;
};

// 48-subchannel band plan: signed indices +-1..+-26 without +-7 and +-21.
std::vector<std::uint8_t> default_active_mask(int M);

struct BerRecord {
    double snrDb = 0.0;
    long bits = 0;
    long errors = 0;
    long frames = 0;
    double ber = 0.0;
    double wilsonHalfWidth = 0.0;
};

// 95% Wilson score half-width for errors out of bits.
double wilson_half_width(long errors, long bits);

std::vector<BerRecord> run_ber_sweep(const SimConfig& cfg);
std::vector<BerRecord> run_ber_sweep_serial(const SimConfig& cfg);

// Adjacent-tone beamformer distances ||V_k - V_{k-1}||_F pooled over draws.
struct DistanceHistogram {
    std::vector<double> edges;
    std::vector<long> counts;  // edges.size() - 1 bins
    long underflow = 0;
    long overflow = 0;
    std::vector<double> distances;  // raw pooled values
    long total() const;
    double mass_above(double threshold) const;
};

DistanceHistogram beamformer_distance_histogram(const SimConfig& cfg,
                                                const SmoothingMethod& method,
                                                bool scramble, long draws,
                                                const std::vector<double>& edges);

// Total variation distance between two histograms over identical edges,
// counting the overflow bucket.
double histogram_total_variation(const DistanceHistogram& a,
                                 const DistanceHistogram& b);

// Residual real-part interference of a unit probe symbol, relative to the
// distortion-free reference chain, averaged over channel draws. Index m of
// the result is the mean over probes of the squared real-part deviation
// summed across streams and half-symbols at subchannel m.
struct LeakProbe {
    int m = 12;
    int n = 6;
    int stream = 0;
};

std::vector<double> measure_leaked_interference(const SimConfig& cfg,
                                                const LeakProbe& probe, long draws);

// RFC 4180 CSV with a header row; one row per record.
std::string ber_csv(const SimConfig& cfg, const std::vector<BerRecord>& records);
void write_ber_csv(const std::string& path, const SimConfig& cfg,
                   const std::vector<BerRecord>& records);

// Key=value run description, stable across reruns of the same config.
void write_manifest(const std::string& path, const SimConfig& cfg);

}  // namespace fsfbmc
