#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fsfbmc/channel_model.hpp"
#include "fsfbmc/types.hpp"

namespace fsfbmc {

// Truncated SVD with a deterministic phase convention: each V column is
// rotated so its largest-magnitude entry is real positive (ties to the
// lowest index), and the paired U column is rotated identically.
struct SvdTriple {
    Eigen::MatrixXcd U;
    Eigen::VectorXd D;
    Eigen::MatrixXcd V;
};

SvdTriple svd_decompose(const Eigen::MatrixXcd& H, int L);

// Phase factor e^{j theta*} minimizing || e^{j theta} vHat - vPrev ||. If the
// vectors are orthogonal every phase is equally bad; vHat is returned as-is
// and *degenerate is set when provided.
Eigen::VectorXcd phase_align(const Eigen::VectorXcd& vHat,
                             const Eigen::VectorXcd& vPrev,
                             bool* degenerate = nullptr);

// Distance between the lines spanned by unit vectors v and w, equal to the
// spectral norm of the difference of their projectors.
double subspace_distance(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w);

// Resolves stream order when singular values cluster. Values whose relative
// gap is below closeness form a cluster; inside it, streams are assigned
// greedily in ascending order to the unused candidate of smallest subspace
// distance (ties to the lowest candidate index). Isolated values keep their
// index. Returns perm with candidate index perm[l] serving stream l.
std::vector<int> pair_streams(const Eigen::VectorXd& lambda,
                              const Eigen::MatrixXcd& candidates,
                              const Eigen::MatrixXcd& previous,
                              double closeness = 0.05);

// nIter rounds of B = (H^H H) Q followed by a modified Gram-Schmidt QR with
// real positive diagonal. D holds the square roots of the final R diagonal.
// flagged reports a rank-deficiency fallback to canonical basis columns.
struct OrthoIterResult {
    Eigen::MatrixXcd V;
    Eigen::MatrixXcd R;
    Eigen::VectorXd D;
    bool flagged = false;
};

OrthoIterResult orthogonal_iteration(const Eigen::MatrixXcd& H,
                                     const Eigen::MatrixXcd& Q0, int nIter);

// U column l = H v_l / d_l; columns whose d_l falls below floor are replaced
// by canonical completion and *degenerate is set.
Eigen::MatrixXcd derive_receive_beamformer(const Eigen::MatrixXcd& H,
                                           const Eigen::MatrixXcd& V,
                                           const Eigen::VectorXd& D,
                                           double floor,
                                           bool* degenerate = nullptr);

struct BeamformerEntry {
    int tone = 0;
    Eigen::MatrixXcd V;  // Nt x L
    Eigen::MatrixXcd U;  // Nr x L
    Eigen::VectorXd D;   // singular value estimates, descending
    Eigen::VectorXd E;   // zero-forcing equalizer 1/D with floor clamp
    bool flagged = false;
};

enum class BeamGranularity { perTone, perSubchannel };

struct BeamformerSet {
    int fftSize = 0;
    int L = 0;
    BeamGranularity granularity = BeamGranularity::perTone;
    std::vector<BeamformerEntry> entries;  // sweep order
    std::vector<int> index;                // tone -> entry position, -1 if absent

    const BeamformerEntry* at(int tone) const {
        if (tone < 0 || tone >= static_cast<int>(index.size())) return nullptr;
        const int i = index[tone];
        return i < 0 ? nullptr : &entries[i];
    }
    void rebuild_index();
};

enum class SmoothingKind { none, phaseFactor, orthoIter };

struct SmoothingMethod {
    SmoothingKind kind = SmoothingKind::orthoIter;
    int nIter = 3;
};

SmoothingMethod parse_smoothing(const std::string& name, int nIter = 3);

// Walks activeTones in the given order, producing L beamformed streams per
// tone. none decomposes every tone independently; phaseFactor re-phases (and
// re-pairs) the independent decomposition against the previous tone;
// orthoIter warm-starts an orthogonal iteration from the previous tone. The
// equalizer clamps at zfFloorRel times the largest singular value seen.
BeamformerSet smooth_sweep(const ChannelFrequencyResponse& channel,
                           const std::vector<int>& activeTones,
                           const SmoothingMethod& method, int L,
                           double zfFloorRel = 1e-6, double closeness = 0.05);

// Rotates every V/U column pair by a deterministic per-(tone, stream) hash
// phase, emulating the arbitrary phases of a generic SVD library while
// leaving U^H H V untouched.
void scramble_phases(BeamformerSet& set);

// Identity beamformers: V and U are the first L canonical basis columns and
// the equalizer is 1. Used as the distortion-free reference chain.
BeamformerSet identity_beamformers(int fftSize, const std::vector<int>& tones,
                                   int Nt, int Nr, int L);

// Largest per-index singular value movement between two channel matrices,
// which can never exceed the spectral norm of the difference.
struct WeylDiagnostic {
    Eigen::VectorXd gaps;
    double deltaNorm = 0.0;
    bool satisfied = false;
};

WeylDiagnostic weyl_check(const Eigen::MatrixXcd& H1, const Eigen::MatrixXcd& H2);

// Subspace perturbation bound for the leading l-dimensional singular
// subspaces of H1 and H2 with separation parameter delta.
struct WedinDiagnostic {
    bool applicable = false;  // separation conditions held
    double lhs = 0.0;         // sqrt of summed sin^2 of principal angles, V and U
    double rhs = 0.0;         // residual-based bound
    double rhsCrude = 0.0;    // sqrt(2) ||H2 - H1||_F / delta
    double separation = 0.0;  // worst observed separation
    bool satisfied = false;
};

WedinDiagnostic wedin_check(const Eigen::MatrixXcd& H1, const Eigen::MatrixXcd& H2,
                            int l, double delta);

// Real-flop estimate of one per-tone beamformer update.
long flops_estimate(int Nt, int Nr, const SmoothingMethod& method);

void export_beamformers(const BeamformerSet& set, const std::string& path);

}  // namespace fsfbmc
