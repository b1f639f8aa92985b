#include "fsfbmc/channel_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fsfbmc/rng.hpp"

namespace fsfbmc {
namespace {

constexpr double kSampleNs = 50.0;

DelayProfile exponential_profile(const std::string& name, double maxDelayNs,
                                 double sampleNs) {
    DelayProfile p;
    p.name = name;
    const int nTaps = static_cast<int>(std::floor(maxDelayNs / sampleNs)) + 1;
    const double tau = maxDelayNs / 4.0;
    double total = 0.0;
    for (int d = 0; d < nTaps; ++d) {
        p.tapDelays.push_back(d);
        const double power = std::exp(-d * sampleNs / tau);
        p.tapPowers.push_back(power);
        total += power;
    }
    for (double& v : p.tapPowers) v /= total;
    return p;
}

}  // namespace

DelayProfile preset_profile(const std::string& model) {
    if (model == "flat") return DelayProfile{"flat", {0}, {1.0}};
    if (model == "D") return exponential_profile("D", 390.0, kSampleNs);
    if (model == "E") return exponential_profile("E", 730.0, kSampleNs);
    if (model == "F") return exponential_profile("F", 1050.0, kSampleNs);
    throw std::invalid_argument("unknown channel model '" + model + "'");
}

DelayProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile " + path);
    std::string name = "custom";
    double maxDelayNs = -1.0, sampleNs = kSampleNs;
    std::vector<std::pair<int, double>> taps;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        strip(key);
        strip(val);
        if (key == "name") {
            name = val;
        } else if (key == "max_delay_ns") {
            maxDelayNs = std::stod(val);
        } else if (key == "sample_ns") {
            sampleNs = std::stod(val);
        } else if (key == "taps") {
            std::istringstream ss(val);
            std::string item;
            while (ss >> item) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw std::runtime_error("bad tap entry '" + item + "' in " + path);
                taps.emplace_back(std::stoi(item.substr(0, colon)),
                                  std::stod(item.substr(colon + 1)));
            }
        } else {
            throw std::runtime_error("unknown profile key '" + key + "' in " + path);
        }
    }
    if (!taps.empty()) {
        DelayProfile p;
        p.name = name;
        double total = 0.0;
        for (auto& [d, pw] : taps) total += pw;
        if (total <= 0.0) throw std::runtime_error("profile taps have no power");
        for (auto& [d, pw] : taps) {
            p.tapDelays.push_back(d);
            p.tapPowers.push_back(pw / total);
        }
        return p;
    }
    if (maxDelayNs <= 0.0)
        throw std::runtime_error("profile needs max_delay_ns or an explicit taps list");
    return exponential_profile(name, maxDelayNs, sampleNs);
}

Eigen::MatrixXcd ChannelFrequencyResponse::tone(int k) const {
    Eigen::MatrixXcd Hk(Nr, Nt);
    for (int r = 0; r < Nr; ++r)
        for (int t = 0; t < Nt; ++t) Hk(r, t) = h(k, r, t);
    return Hk;
}

ChannelFrequencyResponse realize_channel(const DelayProfile& profile, int Nr,
                                         int Nt, int fftSize, std::uint64_t seed) {
    if (Nr < 1 || Nt < 1 || fftSize < 1)
        throw std::invalid_argument("channel dimensions must be positive");
    const int nTaps = static_cast<int>(profile.tapDelays.size());
    ChannelFrequencyResponse ch;
    ch.Nr = Nr;
    ch.Nt = Nt;
    ch.fftSize = fftSize;
    ch.tapDelays = profile.tapDelays;
    ch.taps.resize(static_cast<std::size_t>(Nr) * Nt * nTaps);

    Rng rng(seed);
    for (int r = 0; r < Nr; ++r)
        for (int t = 0; t < Nt; ++t)
            for (int p = 0; p < nTaps; ++p)
                ch.taps[(static_cast<std::size_t>(r) * Nt + t) * nTaps + p] =
                    rng.cgaussian(profile.tapPowers[p]);

    ch.H.resize(static_cast<std::size_t>(fftSize) * Nr * Nt);
    for (int k = 0; k < fftSize; ++k) {
        for (int r = 0; r < Nr; ++r) {
            for (int t = 0; t < Nt; ++t) {
                cd acc(0, 0);
                for (int p = 0; p < nTaps; ++p) {
                    const long kd = static_cast<long>(k) * profile.tapDelays[p] % fftSize;
                    acc += ch.tap(r, t, p) *
                           std::polar(1.0, -2.0 * kPi * static_cast<double>(kd) / fftSize);
                }
                ch.H[(static_cast<std::size_t>(k) * Nr + r) * Nt + t] = acc;
            }
        }
    }
    return ch;
}

double snr_to_noise_variance(double snrDb, int Nt, double sigmaA2, double sigmaH2) {
    if (std::isinf(snrDb) && snrDb > 0) return 0.0;
    return Nt * sigmaA2 * sigmaH2 / std::pow(10.0, snrDb / 10.0);
}

void add_awgn(SampleStream& y, double sigmaN2, double activeFraction,
              std::uint64_t seed) {
    const double var = sigmaN2 * activeFraction;
    if (var == 0.0) return;
    if (var < 0.0) throw std::invalid_argument("noise variance must be non-negative");
    Rng rng(seed);
    for (int a = 0; a < y.antennas; ++a)
        for (long i = 0; i < y.samples; ++i) y.at(a, i) += rng.cgaussian(var);
}

SampleStream apply_channel(const SampleStream& x, const ChannelFrequencyResponse& ch) {
    if (x.antennas != ch.Nt)
        throw std::invalid_argument("sample stream antenna count does not match channel");
    SampleStream y(ch.Nr, x.samples + ch.max_delay());
    const int nTaps = static_cast<int>(ch.tapDelays.size());
    for (int r = 0; r < ch.Nr; ++r) {
        for (int t = 0; t < ch.Nt; ++t) {
            for (int p = 0; p < nTaps; ++p) {
                const cd w = ch.tap(r, t, p);
                const long d = ch.tapDelays[p];
                if (w == cd(0, 0)) continue;
                for (long i = 0; i < x.samples; ++i) y.at(r, i + d) += w * x.at(t, i);
            }
        }
    }
    return y;
}

void export_channel(const ChannelFrequencyResponse& ch, const std::string& path) {
    write_complex64(path, ch.H.data(), ch.H.size());
}

}  // namespace fsfbmc
