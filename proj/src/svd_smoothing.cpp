#include "fsfbmc/svd_smoothing.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "fsfbmc/rng.hpp"

namespace fsfbmc {
namespace {

constexpr double kOrthogonalTiny = 1e-300;

// lowest index of the largest-magnitude entry
int argmax_abs(const Eigen::VectorXcd& v) {
    int best = 0;
    double bestMag = std::abs(v(0));
    for (int i = 1; i < v.size(); ++i) {
        const double mag = std::abs(v(i));
        if (mag > bestMag) {
            bestMag = mag;
            best = i;
        }
    }
    return best;
}

// replace column j of Q with the canonical basis vector least represented by
// the previous columns, orthonormalized against them
void canonical_completion(Eigen::MatrixXcd& Q, int j) {
    for (int t = 0; t < Q.rows(); ++t) {
        Eigen::VectorXcd cand = Eigen::VectorXcd::Zero(Q.rows());
        cand(t) = 1.0;
        for (int i = 0; i < j; ++i) cand -= Q.col(i).dot(cand) * Q.col(i);
        const double nrm = cand.norm();
        if (nrm > 0.5) {
            Q.col(j) = cand / nrm;
            return;
        }
    }
    throw std::runtime_error("canonical completion failed, too many streams");
}

// MGS factorization B = Q R with real positive diagonal; returns true if a
// column collapsed and was completed canonically
bool mgs_qr(const Eigen::MatrixXcd& B, Eigen::MatrixXcd& Q, Eigen::MatrixXcd& R) {
    const int L = static_cast<int>(B.cols());
    Q = B;
    R = Eigen::MatrixXcd::Zero(L, L);
    const double breakdown = 1e-14 * std::max(B.norm(), 1e-300);
    bool completed = false;
    for (int j = 0; j < L; ++j) {
        for (int i = 0; i < j; ++i) {
            const cd r = Q.col(i).dot(Q.col(j));
            R(i, j) = r;
            Q.col(j) -= r * Q.col(i);
        }
        const double nrm = Q.col(j).norm();
        if (nrm < breakdown) {
            canonical_completion(Q, j);
            R(j, j) = 0.0;
            completed = true;
        } else {
            R(j, j) = nrm;
            Q.col(j) /= nrm;
        }
    }
    return completed;
}

std::uint64_t scramble_hash(int tone, int stream) {
    return splitmix64(splitmix64(0x5eed5eedULL + static_cast<std::uint64_t>(tone)) ^
                      static_cast<std::uint64_t>(stream + 1));
}

}  // namespace

SvdTriple svd_decompose(const Eigen::MatrixXcd& H, int L) {
    const int rank = static_cast<int>(std::min(H.rows(), H.cols()));
    if (L < 1 || L > rank)
        throw std::invalid_argument("stream count exceeds the channel rank");

    SvdTriple out;
    if (H.norm() == 0.0) {
        out.U = Eigen::MatrixXcd::Identity(H.rows(), L);
        out.V = Eigen::MatrixXcd::Identity(H.cols(), L);
        out.D = Eigen::VectorXd::Zero(L);
        return out;
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU().leftCols(L);
    out.V = svd.matrixV().leftCols(L);
    out.D = svd.singularValues().head(L);

    const double tiny = 1e-14 * out.D(0);
    for (int l = 0; l < L; ++l) {
        const int i = argmax_abs(out.V.col(l));
        const cd pivot = out.V(i, l);
        if (std::abs(pivot) > 0.0) {
            const cd rot = std::conj(pivot) / std::abs(pivot);
            out.V.col(l) *= rot;
            out.U.col(l) *= rot;
        }
        if (out.D(l) <= tiny) {
            // the U column is decoupled from V at a zero singular value
            const int u = argmax_abs(out.U.col(l));
            const cd up = out.U(u, l);
            if (std::abs(up) > 0.0) out.U.col(l) *= std::conj(up) / std::abs(up);
        }
    }
    return out;
}

Eigen::VectorXcd phase_align(const Eigen::VectorXcd& vHat,
                             const Eigen::VectorXcd& vPrev, bool* degenerate) {
    if (degenerate) *degenerate = false;
    const cd z = vHat.dot(vPrev);  // vHat^H vPrev
    if (std::abs(z) < kOrthogonalTiny) {
        if (degenerate) *degenerate = true;
        return vHat;
    }
    return vHat * (z / std::abs(z));
}

double subspace_distance(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w) {
    const double c = std::min(std::abs(v.dot(w)), 1.0);
    return std::sqrt(std::max(0.0, 1.0 - c * c));
}

std::vector<int> pair_streams(const Eigen::VectorXd& lambda,
                              const Eigen::MatrixXcd& candidates,
                              const Eigen::MatrixXcd& previous, double closeness) {
    const int L = static_cast<int>(lambda.size());
    std::vector<int> perm(L);
    for (int l = 0; l < L; ++l) perm[l] = l;

    int s = 0;
    while (s < L) {
        int e = s;
        while (e + 1 < L &&
               lambda(e) - lambda(e + 1) <= closeness * std::max(lambda(e), 1e-300))
            ++e;
        if (e > s) {
            std::vector<char> used(e - s + 1, 0);
            for (int l = s; l <= e; ++l) {
                int best = -1;
                double bestDist = 0.0;
                for (int c = s; c <= e; ++c) {
                    if (used[c - s]) continue;
                    const double d = subspace_distance(candidates.col(c), previous.col(l));
                    if (best < 0 || d < bestDist) {
                        best = c;
                        bestDist = d;
                    }
                }
                perm[l] = best;
                used[best - s] = 1;
            }
        }
        s = e + 1;
    }
    return perm;
}

OrthoIterResult orthogonal_iteration(const Eigen::MatrixXcd& H,
                                     const Eigen::MatrixXcd& Q0, int nIter) {
    if (nIter < 1) throw std::invalid_argument("iteration count must be positive");
    if (Q0.rows() != H.cols())
        throw std::invalid_argument("warm start dimension does not match the channel");

    const Eigen::MatrixXcd A = H.adjoint() * H;
    OrthoIterResult out;
    out.V = Q0;
    for (int it = 0; it < nIter; ++it) {
        const Eigen::MatrixXcd B = A * out.V;
        out.flagged = mgs_qr(B, out.V, out.R) || out.flagged;
    }
    const int L = static_cast<int>(Q0.cols());
    out.D.resize(L);
    for (int l = 0; l < L; ++l)
        out.D(l) = std::sqrt(std::max(0.0, out.R(l, l).real()));
    return out;
}

Eigen::MatrixXcd derive_receive_beamformer(const Eigen::MatrixXcd& H,
                                           const Eigen::MatrixXcd& V,
                                           const Eigen::VectorXd& D, double floor,
                                           bool* degenerate) {
    if (degenerate) *degenerate = false;
    Eigen::MatrixXcd U(H.rows(), V.cols());
    for (int l = 0; l < V.cols(); ++l) {
        if (D(l) > floor) {
            U.col(l) = H * V.col(l) / D(l);
        } else {
            canonical_completion(U, l);
            if (degenerate) *degenerate = true;
        }
    }
    return U;
}

void BeamformerSet::rebuild_index() {
    index.assign(fftSize, -1);
    for (std::size_t i = 0; i < entries.size(); ++i)
        index[entries[i].tone] = static_cast<int>(i);
}

SmoothingMethod parse_smoothing(const std::string& name, int nIter) {
    if (name == "none") return {SmoothingKind::none, nIter};
    if (name == "phase") return {SmoothingKind::phaseFactor, nIter};
    if (name == "ortho") return {SmoothingKind::orthoIter, nIter};
    throw std::invalid_argument("unknown smoothing method '" + name + "'");
}

BeamformerSet smooth_sweep(const ChannelFrequencyResponse& channel,
                           const std::vector<int>& activeTones,
                           const SmoothingMethod& method, int L,
                           double zfFloorRel, double closeness) {
    BeamformerSet set;
    set.fftSize = channel.fftSize;
    set.L = L;
    set.entries.reserve(activeTones.size());

    Eigen::MatrixXcd prevV;
    for (int tone : activeTones) {
        if (tone < 0 || tone >= channel.fftSize)
            throw std::invalid_argument("active tone outside the channel grid");
        const Eigen::MatrixXcd Hk = channel.tone(tone);
        BeamformerEntry e;
        e.tone = tone;
        if (prevV.size() == 0 || method.kind == SmoothingKind::none) {
            SvdTriple t = svd_decompose(Hk, L);
            e.V = std::move(t.V);
            e.U = std::move(t.U);
            e.D = std::move(t.D);
        } else if (method.kind == SmoothingKind::phaseFactor) {
            const SvdTriple t = svd_decompose(Hk, L);
            const std::vector<int> perm = pair_streams(t.D, t.V, prevV, closeness);
            e.V.resize(t.V.rows(), L);
            e.U.resize(t.U.rows(), L);
            e.D.resize(L);
            for (int l = 0; l < L; ++l) {
                const int c = perm[l];
                const cd z = t.V.col(c).dot(prevV.col(l));
                const cd rot = std::abs(z) < kOrthogonalTiny ? cd(1, 0) : z / std::abs(z);
                e.V.col(l) = t.V.col(c) * rot;
                e.U.col(l) = t.U.col(c) * rot;
                e.D(l) = t.D(c);
            }
        } else {
            OrthoIterResult r = orthogonal_iteration(Hk, prevV, method.nIter);
            e.V = std::move(r.V);
            e.D = std::move(r.D);
            const double uFloor = 1e-9 * (e.D.size() ? e.D.maxCoeff() : 0.0);
            bool degenerate = false;
            e.U = derive_receive_beamformer(Hk, e.V, e.D, uFloor, &degenerate);
            e.flagged = r.flagged || degenerate;
        }
        prevV = e.V;
        set.entries.push_back(std::move(e));
    }

    double lambdaMax = 0.0;
    for (const auto& e : set.entries)
        if (e.D.size()) lambdaMax = std::max(lambdaMax, e.D.maxCoeff());
    const double floor = std::max(zfFloorRel * lambdaMax, 1e-300);
    for (auto& e : set.entries) {
        e.E.resize(e.D.size());
        for (int l = 0; l < e.D.size(); ++l) {
            if (e.D(l) < floor) e.flagged = true;
            e.E(l) = 1.0 / std::max(e.D(l), floor);
        }
    }
    set.rebuild_index();
    return set;
}

void scramble_phases(BeamformerSet& set) {
    for (auto& e : set.entries) {
        for (int l = 0; l < e.V.cols(); ++l) {
            const double u =
                (static_cast<double>(scramble_hash(e.tone, l) >> 11) + 0.5) * 0x1.0p-53;
            const cd rot = std::polar(1.0, 2.0 * kPi * u);
            e.V.col(l) *= rot;
            e.U.col(l) *= rot;
        }
    }
}

BeamformerSet identity_beamformers(int fftSize, const std::vector<int>& tones,
                                   int Nt, int Nr, int L) {
    if (L > Nt || L > Nr)
        throw std::invalid_argument("stream count exceeds the antenna count");
    BeamformerSet set;
    set.fftSize = fftSize;
    set.L = L;
    for (int tone : tones) {
        BeamformerEntry e;
        e.tone = tone;
        e.V = Eigen::MatrixXcd::Identity(Nt, L);
        e.U = Eigen::MatrixXcd::Identity(Nr, L);
        e.D = Eigen::VectorXd::Ones(L);
        e.E = Eigen::VectorXd::Ones(L);
        set.entries.push_back(std::move(e));
    }
    set.rebuild_index();
    return set;
}

WeylDiagnostic weyl_check(const Eigen::MatrixXcd& H1, const Eigen::MatrixXcd& H2) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> s1(H1);
    Eigen::JacobiSVD<Eigen::MatrixXcd> s2(H2);
    Eigen::JacobiSVD<Eigen::MatrixXcd> sd(H2 - H1);
    WeylDiagnostic d;
    d.gaps = (s2.singularValues() - s1.singularValues()).cwiseAbs();
    d.deltaNorm = sd.singularValues()(0);
    d.satisfied = (d.gaps.array() <= d.deltaNorm + 1e-12).all();
    return d;
}

WedinDiagnostic wedin_check(const Eigen::MatrixXcd& H1, const Eigen::MatrixXcd& H2,
                            int l, double delta) {
    const int rank = static_cast<int>(std::min(H1.rows(), H1.cols()));
    if (l < 1 || l > rank) throw std::invalid_argument("subspace dimension out of range");
    if (delta <= 0.0) throw std::invalid_argument("separation delta must be positive");

    Eigen::JacobiSVD<Eigen::MatrixXcd> s1(H1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::JacobiSVD<Eigen::MatrixXcd> s2(H2, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd lam1 = s1.singularValues();
    const Eigen::VectorXd lam2 = s2.singularValues();

    WedinDiagnostic d;
    d.separation = lam2(l - 1);
    for (int i = 0; i < l; ++i)
        for (int j = l; j < rank; ++j)
            d.separation = std::min(d.separation, std::abs(lam2(i) - lam1(j)));
    d.applicable = d.separation >= delta;

    const Eigen::MatrixXcd V1 = s1.matrixV().leftCols(l);
    const Eigen::MatrixXcd V2 = s2.matrixV().leftCols(l);
    const Eigen::MatrixXcd U1 = s1.matrixU().leftCols(l);
    const Eigen::MatrixXcd U2 = s2.matrixU().leftCols(l);

    auto sin2sum = [l](const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> overlap(A.adjoint() * B);
        double sum = 0.0;
        for (int i = 0; i < l; ++i) {
            const double c = std::min(overlap.singularValues()(i), 1.0);
            sum += 1.0 - c * c;
        }
        return sum;
    };
    d.lhs = std::sqrt(sin2sum(V2, V1) + sin2sum(U2, U1));

    const Eigen::MatrixXcd lam2Diag = lam2.head(l).asDiagonal().toDenseMatrix().cast<cd>();
    const Eigen::MatrixXcd rR = H1 * V2 - U2 * lam2Diag;
    const Eigen::MatrixXcd rL = H1.adjoint() * U2 - V2 * lam2Diag;
    d.rhs = std::sqrt(rR.squaredNorm() + rL.squaredNorm()) / delta;
    d.rhsCrude = std::sqrt(2.0) * (H2 - H1).norm() / delta;
    d.satisfied = d.applicable && d.lhs <= d.rhs + 1e-10;
    return d;
}

long flops_estimate(int Nt, int Nr, const SmoothingMethod& method) {
    if (Nt < 1 || Nr < 1) throw std::invalid_argument("antenna counts must be positive");
    const double nt = Nt, nr = Nr;
    if (method.kind == SmoothingKind::phaseFactor)
        return std::lround(4.0 * nt * nt * nr + 8.0 * nt * nr * nr + 9.0 * nr * nr * nr);
    if (method.kind == SmoothingKind::orthoIter) {
        const double it = method.nIter;
        const double formA = nt * nt * nr + nt * nr - 0.5 * nt * nt - 0.5 * nt;
        const double mult = (2.0 * nt * nt * nt - nt * nt) * it;
        const double qr = 4.0 / 3.0 * nt * nt * nt * it;
        const double deriveU = 2.0 * nt * nt * nr;
        return std::lround(formA + mult + qr + deriveU);
    }
    throw std::invalid_argument("no flop model for this smoothing method");
}

void export_beamformers(const BeamformerSet& set, const std::string& path) {
    std::vector<cd> flat;
    for (const auto& e : set.entries) {
        flat.push_back(cd(e.tone, 0));
        for (int c = 0; c < e.V.cols(); ++c)
            for (int r = 0; r < e.V.rows(); ++r) flat.push_back(e.V(r, c));
        for (int c = 0; c < e.U.cols(); ++c)
            for (int r = 0; r < e.U.rows(); ++r) flat.push_back(e.U(r, c));
        for (int l = 0; l < e.D.size(); ++l) flat.push_back(cd(e.D(l), e.E(l)));
    }
    write_complex64(path, flat.data(), flat.size());
}

}  // namespace fsfbmc
