#include "nscascade/cascade.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nscascade {

void SimBudget::validate() const
{
    if (max_nodes < 1) {
        throw std::invalid_argument("max_nodes must be positive");
    }
    if (max_depth < 1 || max_depth > kMaxTreeDepth) {
        throw std::invalid_argument("max_depth must lie in [1, " + std::to_string(kMaxTreeDepth) + "]");
    }
}

void CascadeParams::validate() const
{
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("t must be positive and finite");
    }
    if (!(nu > 0.0) || !std::isfinite(nu)) {
        throw std::invalid_argument("nu must be positive and finite");
    }
    budget.validate();
}

const char* to_string(Mode mode) noexcept
{
    return mode == Mode::Thinned ? "thinned" : "nonthinned";
}

const char* to_string(TerminalReason reason) noexcept
{
    switch (reason) {
    case TerminalReason::SurvivedHorizon: return "survived-horizon";
    case TerminalReason::ThinnedDeath: return "thinned-death";
    case TerminalReason::BudgetTruncated: return "budget-truncated";
    case TerminalReason::Branched: return "branched";
    }
    return "?";
}

Mode mode_from_name(const std::string& name)
{
    if (name == "thinned") {
        return Mode::Thinned;
    }
    if (name == "nonthinned") {
        return Mode::NonThinned;
    }
    throw std::invalid_argument("unknown mode '" + name + "' (expected thinned or nonthinned)");
}

// ---- Genealogy ----------------------------------------------------------------

Genealogy Genealogy::from_index(std::uint64_t index)
{
    if (index == 0 || std::bit_width(index) > kMaxGenealogyDepth + 1) {
        throw std::invalid_argument("genealogy index must be a heap index of depth <= 62");
    }
    return Genealogy(index, static_cast<int>(std::bit_width(index)) - 1);
}

Genealogy Genealogy::child(int j) const
{
    if (j != 1 && j != 2) {
        throw std::invalid_argument("child letter must be 1 or 2");
    }
    if (depth_ >= kMaxTreeDepth) {
        throw std::length_error("genealogy deeper than " + std::to_string(kMaxTreeDepth) + " generations");
    }
    const auto letter = static_cast<std::uint64_t>(j - 1);
    if (depth_ < kMaxGenealogyDepth) {
        return Genealogy(2 * index_ + letter, depth_ + 1);
    }
    constexpr std::uint64_t top = std::uint64_t{1} << 63;
    return Genealogy(mix_seed(index_, 2 + letter) | top, depth_ + 1);
}

Genealogy Genealogy::parent() const
{
    if (depth_ == 0) {
        throw std::logic_error("the root has no parent");
    }
    if (!exact()) {
        throw std::logic_error("the parent of a word deeper than 62 generations is not stored");
    }
    return Genealogy(index_ / 2, depth_ - 1);
}

int Genealogy::letter(int k) const
{
    if (k < 1 || k > depth_) {
        throw std::out_of_range("genealogy letter index out of range");
    }
    if (!exact()) {
        throw std::logic_error("letters of a word deeper than 62 generations are not stored");
    }
    return static_cast<int>((index_ >> (depth_ - k)) & 1u) + 1;
}

std::string Genealogy::str() const
{
    if (!exact()) {
        return "#" + std::to_string(depth_);
    }
    std::string s;
    for (int k = 1; k <= depth_; ++k) {
        s.push_back(static_cast<char>('0' + letter(k)));
    }
    return s;
}

// ---- StreamDraws ----------------------------------------------------------------

double StreamDraws::clock(const Genealogy& g)
{
    RngStream s = base_.substream(g.index());
    return s.exponential();
}

bool StreamDraws::branch_coin(const Genealogy& g)
{
    RngStream s = base_.substream(g.index());
    (void)s.exponential();
    return s.uniform() < 0.5;
}

OffspringPair StreamDraws::offspring(const Genealogy& g, const Wavenumber& parent)
{
    RngStream s = base_.substream(g.index());
    (void)s.exponential();
    (void)s.uniform();
    return sample_offspring(kernel_, parent, s);
}

// ---- NS cascade -------------------------------------------------------------------

namespace {

// NS dynamics shared by the tree builder and the streaming counter.  Nodes are
// numbered in depth-first order (child 1 before child 2) for the budget.
struct NsWalker {
    const CascadeParams& params;
    CascadeDraws& draws;
    std::uint64_t nodes = 1;

    TerminalReason step(const Genealogy& g, const Wavenumber& w, double birth, double& clock, double& hold,
                        OffspringPair& kids)
    {
        clock = draws.clock(g);
        hold = clock / (params.nu * w.norm2());
        if (birth + hold >= params.t) {
            return TerminalReason::SurvivedHorizon;
        }
        if (params.mode == Mode::Thinned && !draws.branch_coin(g)) {
            return TerminalReason::ThinnedDeath;
        }
        if (!params.budget.allows_branch(g.depth(), nodes)) {
            return TerminalReason::BudgetTruncated;
        }
        nodes += 2;
        kids = draws.offspring(g, w);
        return TerminalReason::Branched;
    }

    CascadeNode build(const Genealogy& g, const Wavenumber& w, double birth)
    {
        CascadeNode node;
        node.genealogy = g;
        node.wavenumber = w;
        node.birth = birth;
        OffspringPair kids;
        node.terminal_reason = step(g, w, birth, node.clock, node.hold, kids);
        if (node.terminal_reason == TerminalReason::Branched) {
            const double next = birth + node.hold;
            node.children.reserve(2);
            node.children.push_back(build(g.child(1), kids.w1, next));
            node.children.push_back(build(g.child(2), kids.w2, next));
        }
        return node;
    }

    void count(const Genealogy& g, const Wavenumber& w, double birth, TreeSummary& out)
    {
        ++out.nodes;
        out.max_depth = std::max(out.max_depth, g.depth());
        double clock = 0.0;
        double hold = 0.0;
        OffspringPair kids;
        switch (step(g, w, birth, clock, hold, kids)) {
        case TerminalReason::SurvivedHorizon: ++out.alive; return;
        case TerminalReason::ThinnedDeath: ++out.deaths; return;
        case TerminalReason::BudgetTruncated: ++out.truncated; return;
        case TerminalReason::Branched: break;
        }
        ++out.branchings;
        count(g.child(1), kids.w1, birth + hold, out);
        count(g.child(2), kids.w2, birth + hold, out);
    }
};

void check_root(const Wavenumber& root)
{
    const double n = root.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("root wavenumber must be nonzero and finite");
    }
}

} // namespace

CascadeNode simulate_ns_tree(const Wavenumber& root, const CascadeParams& params, CascadeDraws& draws)
{
    check_root(root);
    params.validate();
    NsWalker walker{params, draws};
    return walker.build(Genealogy::root(), root, 0.0);
}

CascadeNode simulate_ns_tree(const Wavenumber& root, const CascadeParams& params, const KernelKind& kernel,
                             const RngStream& rng)
{
    StreamDraws draws(kernel, rng);
    return simulate_ns_tree(root, params, draws);
}

TreeSummary summarize_ns_tree(const Wavenumber& root, const CascadeParams& params, CascadeDraws& draws)
{
    check_root(root);
    params.validate();
    NsWalker walker{params, draws};
    TreeSummary out;
    walker.count(Genealogy::root(), root, 0.0, out);
    return out;
}

TreeSummary summarize_ns_tree(const Wavenumber& root, const CascadeParams& params, const KernelKind& kernel,
                              const RngStream& rng)
{
    StreamDraws draws(kernel, rng);
    return summarize_ns_tree(root, params, draws);
}

namespace {

template <class Node>
void summarize_into(const Node& node, TreeSummary& out)
{
    ++out.nodes;
    out.max_depth = std::max(out.max_depth, node.genealogy.depth());
    switch (node.terminal_reason) {
    case TerminalReason::SurvivedHorizon: ++out.alive; break;
    case TerminalReason::ThinnedDeath: ++out.deaths; break;
    case TerminalReason::BudgetTruncated: ++out.truncated; break;
    case TerminalReason::Branched: ++out.branchings; break;
    }
    for (const auto& c : node.children) {
        summarize_into(c, out);
    }
}

} // namespace

TreeSummary summarize(const CascadeNode& tree)
{
    TreeSummary out;
    summarize_into(tree, out);
    return out;
}

TreeSummary summarize(const SelfSimilarNode& tree)
{
    TreeSummary out;
    summarize_into(tree, out);
    return out;
}

std::optional<std::uint64_t> branch_count(const Wavenumber& root, const CascadeParams& params,
                                          const KernelKind& kernel, const RngStream& rng)
{
    const TreeSummary s = summarize_ns_tree(root, params, kernel, rng);
    if (s.truncated > 0) {
        return std::nullopt;
    }
    return s.alive;
}

// ---- explosion-time functionals ------------------------------------------------------

namespace {

void check_zeta_depth(int n, int max_depth)
{
    if (n < 0) {
        throw std::invalid_argument("depth n must be non-negative");
    }
    if (max_depth > kMaxGenealogyDepth) {
        throw std::invalid_argument("max_depth cannot exceed 62");
    }
    if (n > max_depth) {
        throw std::invalid_argument("depth n = " + std::to_string(n) + " exceeds the configured maximum " +
                                    std::to_string(max_depth));
    }
}

// A path state for the minimum-path search.  `scale` is |W_s|^2 for the NS
// cascade and prod |W~|^2 for the self-similar one; `sum` already contains the
// node's own term.
struct PathState {
    Genealogy g;
    Vec3 w;
    double scale;
    double sum;
};

class MinPathSearch {
public:
    MinPathSearch(CascadeDraws& draws, int n, bool prune, bool selfsimilar)
        : draws_(draws), n_(n), prune_(prune), selfsimilar_(selfsimilar)
    {
    }

    double run(const Vec3& root)
    {
        const double scale = selfsimilar_ ? 1.0 : root.norm2();
        const Genealogy g = Genealogy::root();
        visit({g, root, scale, draws_.clock(g) / scale});
        return best_;
    }

private:
    PathState child_state(const PathState& s, int j, const Vec3& w) const
    {
        const Genealogy g = s.g.child(j);
        double scale;
        Vec3 dir = w;
        if (selfsimilar_) {
            const double r2 = w.norm2();
            scale = s.scale * r2;
            dir = w * (1.0 / std::sqrt(r2));
        } else {
            scale = w.norm2();
        }
        return {g, dir, scale, s.sum + draws_.clock(g) / scale};
    }

    void visit(const PathState& s)
    {
        if (prune_ && s.sum >= best_) {
            return;
        }
        if (s.g.depth() == n_) {
            best_ = std::min(best_, s.sum);
            return;
        }
        const OffspringPair kids = draws_.offspring(s.g, s.w);
        const PathState a = child_state(s, 1, kids.w1);
        const PathState b = child_state(s, 2, kids.w2);
        if (prune_ && b.sum < a.sum) {
            visit(b);
            visit(a);
        } else {
            visit(a);
            visit(b);
        }
    }

    CascadeDraws& draws_;
    int n_;
    bool prune_;
    bool selfsimilar_;
    double best_ = std::numeric_limits<double>::infinity();
};

void check_unit(const Vec3& e)
{
    if (!(std::abs(e.norm() - 1.0) <= 1e-12)) {
        throw std::invalid_argument("initial direction must be a unit vector");
    }
}

} // namespace

double zeta_n(const Wavenumber& root, int n, CascadeDraws& draws, int max_depth)
{
    check_root(root);
    check_zeta_depth(n, max_depth);
    return MinPathSearch(draws, n, true, false).run(root);
}

double zeta_n(const Wavenumber& root, int n, const KernelKind& kernel, const RngStream& rng, int max_depth)
{
    StreamDraws draws(kernel, rng);
    return zeta_n(root, n, draws, max_depth);
}

double zeta_n_exhaustive(const Wavenumber& root, int n, CascadeDraws& draws, int max_depth)
{
    check_root(root);
    check_zeta_depth(n, max_depth);
    return MinPathSearch(draws, n, false, false).run(root);
}

double zeta_tilde_n(int n, CascadeDraws& draws, const Vec3& e0, int max_depth)
{
    check_unit(e0);
    check_zeta_depth(n, max_depth);
    return MinPathSearch(draws, n, true, true).run(e0);
}

double zeta_tilde_n(int n, const RngStream& rng, const Vec3& e0, int max_depth)
{
    StreamDraws draws(KernelKind::dilog(), rng);
    return zeta_tilde_n(n, draws, e0, max_depth);
}

// ---- self-similar tree -------------------------------------------------------------

namespace {

struct SelfSimilarBuilder {
    const SimBudget& budget;
    CascadeDraws& draws;
    std::uint64_t nodes = 1;

    SelfSimilarNode build(const Genealogy& g, const Vec3& e, double lambda)
    {
        SelfSimilarNode node;
        node.genealogy = g;
        node.direction = e;
        node.horizon = lambda;
        node.clock = draws.clock(g);
        if (!(node.clock < lambda)) {
            node.terminal_reason = TerminalReason::SurvivedHorizon;
            return node;
        }
        if (!budget.allows_branch(g.depth(), nodes)) {
            node.terminal_reason = TerminalReason::BudgetTruncated;
            return node;
        }
        nodes += 2;
        node.terminal_reason = TerminalReason::Branched;
        const OffspringPair kids = draws.offspring(g, e);
        const double rest = lambda - node.clock;
        node.ratio1 = kids.w1.norm();
        node.ratio2 = kids.w2.norm();
        node.children.reserve(2);
        node.children.push_back(build(g.child(1), kids.w1 * (1.0 / node.ratio1), kids.w1.norm2() * rest));
        node.children.push_back(build(g.child(2), kids.w2 * (1.0 / node.ratio2), kids.w2.norm2() * rest));
        return node;
    }
};

} // namespace

SelfSimilarNode simulate_selfsimilar_tree(const Vec3& e0, double lambda0, const SimBudget& budget,
                                          CascadeDraws& draws)
{
    check_unit(e0);
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) {
        throw std::invalid_argument("lambda0 must be positive and finite");
    }
    budget.validate();
    SelfSimilarBuilder b{budget, draws};
    return b.build(Genealogy::root(), e0, lambda0);
}

SelfSimilarNode simulate_selfsimilar_tree(const Vec3& e0, double lambda0, const SimBudget& budget,
                                          const RngStream& rng)
{
    StreamDraws draws(KernelKind::dilog(), rng);
    return simulate_selfsimilar_tree(e0, lambda0, budget, draws);
}

} // namespace nscascade
