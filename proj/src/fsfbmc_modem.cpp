#include "fsfbmc/fsfbmc_modem.hpp"

#include <algorithm>
#include <stdexcept>

#include "fsfbmc/fft.hpp"

namespace fsfbmc {
namespace {

int modn(long x, int n) { return static_cast<int>(((x % n) + n) % n); }

// OQAM sign pattern: i^{m+n} from the half-symbol lattice and (-1)^{mn} from
// carrying the subchannel carrier in absolute time across window starts.
cd lattice_phase(int m, int n) {
    const cd base = ipow(m + n);
    return ((m & 1) && (n & 1)) ? -base : base;
}

const BeamformerEntry& entry_at(const BeamformerSet& bf, int tone) {
    const BeamformerEntry* e = bf.at(tone);
    if (!e) throw std::invalid_argument("no beamformer for tone " + std::to_string(tone));
    return *e;
}

}  // namespace

FsFbmcModem::FsFbmcModem(const PrototypeFilter& filter, int fftFactor,
                         double spreadThreshold)
    : filter_(filter),
      kappa_(fftFactor > 0 ? fftFactor : filter.K),
      N_(kappa_ * filter.M),
      table_(make_spread_table(filter, N_, spreadThreshold)) {
    if (kappa_ < filter.K)
        throw std::invalid_argument("fft factor must be at least the overlap factor");
}

std::vector<int> FsFbmcModem::active_tones(
    const std::vector<std::uint8_t>& activeMask) const {
    if (static_cast<int>(activeMask.size()) != filter_.M)
        throw std::invalid_argument("active mask length must equal the subchannel count");
    std::vector<std::uint8_t> hit(N_, 0);
    for (int m = 0; m < filter_.M; ++m) {
        if (!activeMask[m]) continue;
        for (int off : table_.offsets) hit[modn(static_cast<long>(kappa_) * m + off, N_)] = 1;
    }
    std::vector<int> tones;
    for (int k = 0; k < N_; ++k)
        if (hit[k]) tones.push_back(k);
    std::sort(tones.begin(), tones.end(), [this](int a, int b) {
        const int sa = a >= N_ / 2 ? a - N_ : a;
        const int sb = b >= N_ / 2 ? b - N_ : b;
        return sa < sb;
    });
    return tones;
}

SampleStream FsFbmcModem::modulate(const PamGrid& pam, const BeamformerSet& bf,
                                   std::vector<ToneFrame>* toneFrames) const {
    if (pam.M != filter_.M)
        throw std::invalid_argument("symbol grid subchannel count does not match the filter");
    if (static_cast<int>(pam.activeMask.size()) != pam.M)
        throw std::invalid_argument("symbol grid is missing its active mask");
    if (bf.fftSize != N_)
        throw std::invalid_argument("beamformer grid does not match the modem fft size");
    if (bf.entries.empty()) throw std::invalid_argument("beamformer set is empty");
    const int L = pam.streams;
    const int Nt = static_cast<int>(bf.entries.front().V.rows());
    if (static_cast<int>(bf.entries.front().V.cols()) != L)
        throw std::invalid_argument("beamformer stream count does not match the symbol grid");

    SampleStream x(Nt, sample_count(pam.halfTimes));
    if (toneFrames) toneFrames->clear();

    std::vector<cd> t;  // per-tone stream vectors, k-major
    if (bf.granularity == BeamGranularity::perTone)
        t.resize(static_cast<std::size_t>(N_) * L);
    std::vector<cd> b(static_cast<std::size_t>(N_) * Nt);
    std::vector<cd> in(N_), out(N_);
    std::vector<cd> w(std::max(Nt, 1));

    const double invN = 1.0 / N_;
    for (int n = 0; n < pam.halfTimes; ++n) {
        std::fill(b.begin(), b.end(), cd(0, 0));
        if (bf.granularity == BeamGranularity::perTone) {
            std::fill(t.begin(), t.end(), cd(0, 0));
            for (int m = 0; m < pam.M; ++m) {
                if (!pam.activeMask[m]) continue;
                const cd phase = lattice_phase(m, n);
                for (std::size_t o = 0; o < table_.offsets.size(); ++o) {
                    const int k = modn(static_cast<long>(kappa_) * m + table_.offsets[o], N_);
                    const cd coeff = table_.values[o] * phase * invN;
                    for (int l = 0; l < L; ++l)
                        t[static_cast<std::size_t>(k) * L + l] += coeff * pam.at(l, m, n);
                }
            }
            for (int k = 0; k < N_; ++k) {
                bool any = false;
                for (int l = 0; l < L; ++l)
                    if (t[static_cast<std::size_t>(k) * L + l] != cd(0, 0)) any = true;
                if (!any) continue;
                const BeamformerEntry& e = entry_at(bf, k);
                for (int a = 0; a < Nt; ++a) {
                    cd acc(0, 0);
                    for (int l = 0; l < L; ++l)
                        acc += e.V(a, l) * t[static_cast<std::size_t>(k) * L + l];
                    b[static_cast<std::size_t>(k) * Nt + a] = acc;
                }
            }
        } else {
            for (int m = 0; m < pam.M; ++m) {
                if (!pam.activeMask[m]) continue;
                const BeamformerEntry& e = entry_at(bf, modn(static_cast<long>(kappa_) * m, N_));
                const cd phase = lattice_phase(m, n);
                for (int a = 0; a < Nt; ++a) {
                    cd acc(0, 0);
                    for (int l = 0; l < L; ++l) acc += e.V(a, l) * pam.at(l, m, n);
                    w[a] = acc * phase * invN;
                }
                for (std::size_t o = 0; o < table_.offsets.size(); ++o) {
                    const int k = modn(static_cast<long>(kappa_) * m + table_.offsets[o], N_);
                    for (int a = 0; a < Nt; ++a)
                        b[static_cast<std::size_t>(k) * Nt + a] += table_.values[o] * w[a];
                }
            }
        }

        if (toneFrames) {
            ToneFrame frame(Nt, N_);
            for (int k = 0; k < N_; ++k)
                for (int a = 0; a < Nt; ++a)
                    frame.at(a, k) = b[static_cast<std::size_t>(k) * Nt + a] * static_cast<double>(N_);
            toneFrames->push_back(std::move(frame));
        }

        const long start = static_cast<long>(n) * (filter_.M / 2);
        for (int a = 0; a < Nt; ++a) {
            for (int k = 0; k < N_; ++k) in[k] = b[static_cast<std::size_t>(k) * Nt + a];
            ifft_unscaled(in.data(), out.data(), N_);
            for (int i = 0; i < N_; ++i) x.at(a, start + i) += out[i];
        }
    }
    return x;
}

FsFbmcModem::DemodResult FsFbmcModem::demodulate(
    const SampleStream& y, const BeamformerSet& bf, int halfTimes,
    const std::vector<std::uint8_t>& activeMask) const {
    if (static_cast<int>(activeMask.size()) != filter_.M)
        throw std::invalid_argument("active mask length must equal the subchannel count");
    if (bf.fftSize != N_)
        throw std::invalid_argument("beamformer grid does not match the modem fft size");
    if (bf.entries.empty()) throw std::invalid_argument("beamformer set is empty");
    const int L = bf.L;
    const int Nr = y.antennas;
    if (static_cast<int>(bf.entries.front().U.rows()) != Nr)
        throw std::invalid_argument("beamformer antenna count does not match the samples");

    DemodResult res;
    res.estimates = ComplexGrid(L, filter_.M, halfTimes);
    res.pam = PamGrid(L, filter_.M, halfTimes);
    res.pam.activeMask = activeMask;

    const std::vector<int> tones = active_tones(activeMask);
    std::vector<cd> in(N_), out(N_);
    std::vector<cd> bhat(static_cast<std::size_t>(N_) * Nr);
    std::vector<cd> z(static_cast<std::size_t>(N_) * L);
    std::vector<cd> c(std::max(Nr, 1));

    const double invN = 1.0 / N_;
    for (int n0 = 0; n0 < halfTimes; ++n0) {
        const long start = static_cast<long>(n0) * (filter_.M / 2);
        for (int a = 0; a < Nr; ++a) {
            for (int i = 0; i < N_; ++i) {
                const long src = start + i;
                in[i] = src < y.samples ? y.at(a, src) : cd(0, 0);
            }
            fft(in.data(), out.data(), N_);
            for (int k = 0; k < N_; ++k)
                bhat[static_cast<std::size_t>(k) * Nr + a] = out[k] * invN;
        }

        if (bf.granularity == BeamGranularity::perTone) {
            for (int k : tones) {
                const BeamformerEntry& e = entry_at(bf, k);
                for (int l = 0; l < L; ++l) {
                    cd acc(0, 0);
                    for (int a = 0; a < Nr; ++a)
                        acc += std::conj(e.U(a, l)) * bhat[static_cast<std::size_t>(k) * Nr + a];
                    z[static_cast<std::size_t>(k) * L + l] = acc * e.E(l);
                }
            }
            for (int m = 0; m < filter_.M; ++m) {
                if (!activeMask[m]) continue;
                const cd phaseConj = std::conj(lattice_phase(m, n0));
                for (int l = 0; l < L; ++l) {
                    cd acc(0, 0);
                    for (std::size_t o = 0; o < table_.offsets.size(); ++o) {
                        const int k = modn(static_cast<long>(kappa_) * m + table_.offsets[o], N_);
                        acc += std::conj(table_.values[o]) *
                               z[static_cast<std::size_t>(k) * L + l];
                    }
                    res.estimates.at(l, m, n0) = acc * phaseConj;
                }
            }
        } else {
            for (int m = 0; m < filter_.M; ++m) {
                if (!activeMask[m]) continue;
                const BeamformerEntry& e = entry_at(bf, modn(static_cast<long>(kappa_) * m, N_));
                const cd phaseConj = std::conj(lattice_phase(m, n0));
                for (int a = 0; a < Nr; ++a) {
                    cd acc(0, 0);
                    for (std::size_t o = 0; o < table_.offsets.size(); ++o) {
                        const int k = modn(static_cast<long>(kappa_) * m + table_.offsets[o], N_);
                        acc += std::conj(table_.values[o]) *
                               bhat[static_cast<std::size_t>(k) * Nr + a];
                    }
                    c[a] = acc;
                }
                for (int l = 0; l < L; ++l) {
                    cd acc(0, 0);
                    for (int a = 0; a < Nr; ++a) acc += std::conj(e.U(a, l)) * c[a];
                    res.estimates.at(l, m, n0) = acc * e.E(l) * phaseConj;
                }
            }
        }

        for (int m = 0; m < filter_.M; ++m) {
            if (!activeMask[m]) continue;
            for (int l = 0; l < L; ++l)
                res.pam.at(l, m, n0) = res.estimates.at(l, m, n0).real();
        }
    }
    return res;
}

std::vector<double> FsFbmcModem::despread_noise_variance(
    const BeamformerSet& bf, const std::vector<std::uint8_t>& activeMask,
    double sampleNoiseVar) const {
    if (static_cast<int>(activeMask.size()) != filter_.M)
        throw std::invalid_argument("active mask length must equal the subchannel count");
    double spreadEnergy = 0.0;
    for (const cd& v : table_.values) spreadEnergy += std::norm(v);

    std::vector<double> var(static_cast<std::size_t>(filter_.M) * bf.L, 0.0);
    const double base = sampleNoiseVar / N_;
    for (int m = 0; m < filter_.M; ++m) {
        if (!activeMask[m]) continue;
        for (int l = 0; l < bf.L; ++l) {
            double sum = 0.0;
            if (bf.granularity == BeamGranularity::perTone) {
                for (std::size_t o = 0; o < table_.offsets.size(); ++o) {
                    const BeamformerEntry& e =
                        entry_at(bf, modn(static_cast<long>(kappa_) * m + table_.offsets[o], N_));
                    sum += std::norm(table_.values[o]) * e.E(l) * e.E(l);
                }
            } else {
                const BeamformerEntry& e = entry_at(bf, modn(static_cast<long>(kappa_) * m, N_));
                sum = spreadEnergy * e.E(l) * e.E(l);
            }
            var[static_cast<std::size_t>(m) * bf.L + l] = base * sum;
        }
    }
    return var;
}

PamGrid oqam_stagger(const ComplexGrid& qam, const std::vector<std::uint8_t>& activeMask) {
    PamGrid pam(qam.streams, qam.M, 2 * qam.cols);
    if (!activeMask.empty()) {
        if (static_cast<int>(activeMask.size()) != qam.M)
            throw std::invalid_argument("active mask length must equal the subchannel count");
        pam.activeMask = activeMask;
    }
    for (int l = 0; l < qam.streams; ++l)
        for (int m = 0; m < qam.M; ++m)
            for (int n = 0; n < qam.cols; ++n) {
                const cd s = qam.at(l, m, n);
                pam.at(l, m, 2 * n) = s.real();
                pam.at(l, m, 2 * n + 1) = s.imag();
            }
    return pam;
}

ComplexGrid oqam_destagger(const PamGrid& pam) {
    if (pam.halfTimes % 2 != 0)
        throw std::invalid_argument("destaggering needs an even number of half-symbols");
    ComplexGrid qam(pam.streams, pam.M, pam.halfTimes / 2);
    for (int l = 0; l < pam.streams; ++l)
        for (int m = 0; m < pam.M; ++m)
            for (int n = 0; n < qam.cols; ++n)
                qam.at(l, m, n) = cd(pam.at(l, m, 2 * n), pam.at(l, m, 2 * n + 1));
    return qam;
}

}  // namespace fsfbmc
