#pragma once

#include "nscascade/kernels.hpp"
#include "nscascade/rng.hpp"
#include "nscascade/vec3.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nscascade {

/// Caps on tree growth.  Hitting either cap is recorded, never raised.
struct SimBudget {
    std::uint64_t max_nodes = std::uint64_t{1} << 22;
    int max_depth = 25;

    /// Throws std::invalid_argument unless both caps are positive and max_depth <= kMaxTreeDepth.
    void validate() const;

    /// True when a node at `depth` may create two children given `nodes` already created.
    bool allows_branch(int depth, std::uint64_t nodes) const noexcept
    {
        return depth + 1 <= max_depth && nodes + 2 <= max_nodes;
    }
};

/// Deepest generation whose word is stored exactly as a heap index.
inline constexpr int kMaxGenealogyDepth = 62;
/// Largest depth cap a simulation accepts.
inline constexpr int kMaxTreeDepth = 10000;

/// Default ceiling for the explosion-time functionals.
inline constexpr int kDefaultZetaDepth = 25;

enum class Mode { Thinned, NonThinned };

enum class TerminalReason { SurvivedHorizon, ThinnedDeath, BudgetTruncated, Branched };

const char* to_string(Mode mode) noexcept;
const char* to_string(TerminalReason reason) noexcept;
Mode mode_from_name(const std::string& name);

/// A finite word over {1, 2}.  Up to depth 62 it is stored as a heap index:
/// the root is 1 and child j of index i is 2 i + (j - 1).  Deeper words keep
/// only a 64-bit hash of the path (top bit set, so it never equals a heap
/// index); the RNG substream of a node is this index either way.
class Genealogy {
public:
    constexpr Genealogy() noexcept = default;
    static constexpr Genealogy root() noexcept { return {}; }
    /// Heap index of a word of depth <= 62.
    static Genealogy from_index(std::uint64_t index);

    constexpr std::uint64_t index() const noexcept { return index_; }
    constexpr int depth() const noexcept { return depth_; }
    /// True when the word itself is stored (depth <= 62).
    constexpr bool exact() const noexcept { return depth_ <= kMaxGenealogyDepth; }
    /// j in {1, 2}.  Throws std::length_error beyond kMaxTreeDepth.
    Genealogy child(int j) const;
    /// Exact words only (std::logic_error otherwise).
    Genealogy parent() const;
    /// Letter at position k (1-based, k <= depth); exact words only.
    int letter(int k) const;
    /// "" for the root, otherwise the digits, e.g. "121"; "#<depth>" for hashed words.
    std::string str() const;

    friend constexpr bool operator==(Genealogy, Genealogy) = default;

private:
    constexpr Genealogy(std::uint64_t index, int depth) noexcept : index_(index), depth_(depth) {}
    std::uint64_t index_ = 1;
    int depth_ = 0;
};

/// Source of the per-node randomness of a cascade.  Every quantity attached to
/// node s is a function of s alone, so any traversal order sees the same tree.
class CascadeDraws {
public:
    virtual ~CascadeDraws() = default;
    /// Unit-mean exponential clock T_s.
    virtual double clock(const Genealogy& g) = 0;
    /// Thinning coin: true means branch, false means death.
    virtual bool branch_coin(const Genealogy& g) = 0;
    /// Offspring of node g whose wavenumber is `parent`.
    virtual OffspringPair offspring(const Genealogy& g, const Wavenumber& parent) = 0;
};

/// Draws from one replicate stream: node s reads substream s.index() in the
/// fixed order clock, coin, offspring.
class StreamDraws final : public CascadeDraws {
public:
    StreamDraws(const KernelKind& kernel, const RngStream& replicate) noexcept
        : kernel_(kernel), base_(replicate)
    {
    }

    double clock(const Genealogy& g) override;
    bool branch_coin(const Genealogy& g) override;
    OffspringPair offspring(const Genealogy& g, const Wavenumber& parent) override;

    const KernelKind& kernel() const noexcept { return kernel_; }

private:
    KernelKind kernel_;
    RngStream base_;
};

// ---- Navier-Stokes cascade ---------------------------------------------------

struct CascadeNode {
    Genealogy genealogy;
    Wavenumber wavenumber;
    double clock = 0.0;     ///< unit-mean exponential T_s
    double birth = 0.0;     ///< time at which the node appears
    double hold = 0.0;      ///< T_s / (nu |W_s|^2)
    TerminalReason terminal_reason = TerminalReason::SurvivedHorizon;
    std::vector<CascadeNode> children; ///< empty or exactly two
};

struct CascadeParams {
    double t = 1.0;
    Mode mode = Mode::NonThinned;
    double nu = 1.0;
    SimBudget budget{};

    void validate() const;
};

CascadeNode simulate_ns_tree(const Wavenumber& root, const CascadeParams& params, CascadeDraws& draws);
CascadeNode simulate_ns_tree(const Wavenumber& root, const CascadeParams& params, const KernelKind& kernel,
                             const RngStream& rng);

/// Aggregate counts of a tree, computed without storing it.
struct TreeSummary {
    std::uint64_t nodes = 0;
    std::uint64_t branchings = 0;
    std::uint64_t alive = 0;      ///< particles alive at the horizon
    std::uint64_t deaths = 0;
    std::uint64_t truncated = 0;  ///< budget-truncated nodes
    int max_depth = 0;
};

TreeSummary summarize_ns_tree(const Wavenumber& root, const CascadeParams& params, CascadeDraws& draws);
TreeSummary summarize_ns_tree(const Wavenumber& root, const CascadeParams& params, const KernelKind& kernel,
                              const RngStream& rng);
TreeSummary summarize(const CascadeNode& tree);

/// Z(xi, t): particles alive at time t, or nullopt when the budget was hit.
std::optional<std::uint64_t> branch_count(const Wavenumber& root, const CascadeParams& params,
                                          const KernelKind& kernel, const RngStream& rng);

/// min over depth-n genealogies s of sum_{j=0..n} T_{s|j} / |W_{s|j}|^2, by
/// depth-first branch and bound.  Throws std::invalid_argument if n > max_depth.
double zeta_n(const Wavenumber& root, int n, CascadeDraws& draws, int max_depth = kDefaultZetaDepth);
double zeta_n(const Wavenumber& root, int n, const KernelKind& kernel, const RngStream& rng,
              int max_depth = kDefaultZetaDepth);

/// Same minimum by visiting all 2^n paths; summation order identical to zeta_n.
double zeta_n_exhaustive(const Wavenumber& root, int n, CascadeDraws& draws, int max_depth = kDefaultZetaDepth);

// ---- self-similar cascade ----------------------------------------------------

struct SelfSimilarNode {
    Genealogy genealogy;
    Vec3 direction;        ///< e_s
    double horizon = 0.0;  ///< lambda_s
    double clock = 0.0;    ///< T_s
    double ratio1 = 0.0;   ///< |W~_{s1}| when branched
    double ratio2 = 0.0;   ///< |W~_{s2}| when branched
    TerminalReason terminal_reason = TerminalReason::SurvivedHorizon;
    std::vector<SelfSimilarNode> children;
};

/// Throws std::invalid_argument unless |e0| = 1 (to 1e-12) and lambda0 > 0.
SelfSimilarNode simulate_selfsimilar_tree(const Vec3& e0, double lambda0, const SimBudget& budget,
                                          CascadeDraws& draws);
SelfSimilarNode simulate_selfsimilar_tree(const Vec3& e0, double lambda0, const SimBudget& budget,
                                          const RngStream& rng);

TreeSummary summarize(const SelfSimilarNode& tree);

/// min over depth-n genealogies of sum_{j=0..n} T_{s|j} / prod_{k<=j} |W~_{s|k}|^2.
double zeta_tilde_n(int n, CascadeDraws& draws, const Vec3& e0 = {0.0, 0.0, 1.0},
                    int max_depth = kDefaultZetaDepth);
double zeta_tilde_n(int n, const RngStream& rng, const Vec3& e0 = {0.0, 0.0, 1.0},
                    int max_depth = kDefaultZetaDepth);

} // namespace nscascade
