#include "metastable/observable.hpp"

#include <cmath>
#include <stdexcept>

namespace metastable {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// Exact antiderivative of the piece polynomial evaluated over [lo, hi].
double piece_integral(const PolyPiece& p, double lo, double hi) {
    auto anti = [&](double x) {
        return x * (p.coeff[0] +
                    x * (p.coeff[1] / 2.0 + x * (p.coeff[2] / 3.0 + x * p.coeff[3] / 4.0)));
    };
    return anti(hi) - anti(lo);
}

/// Exact integral of the squared piece polynomial (degree <= 6) via
/// 4-point Gauss-Legendre, which is exact through degree 7.
double piece_integral_squared(const PolyPiece& p, double lo, double hi) {
    static const double nodes[4] = {-0.8611363115940526, -0.3399810435848563,
                                    0.3399810435848563, 0.8611363115940526};
    static const double weights[4] = {0.3478548451374538, 0.6521451548625461,
                                      0.6521451548625461, 0.3478548451374538};
    double mid = 0.5 * (lo + hi);
    double half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        double v = p.eval(mid + half * nodes[i]);
        s += weights[i] * v * v;
    }
    return s * half;
}

}  // namespace

Observable::Observable(std::vector<std::vector<PolyPiece>> pieces_per_symbol, double sup_bound,
                       double variation_bound)
    : pieces_(std::move(pieces_per_symbol)),
      sup_bound_(sup_bound),
      variation_bound_(variation_bound) {
    require(!pieces_.empty(), "observable needs at least one symbol");
    require(std::isfinite(sup_bound_) && std::isfinite(variation_bound_),
            "observable needs finite declared bounds");
    for (auto& table : pieces_) {
        require(!table.empty(), "each symbol needs at least one piece");
        for (std::size_t i = 0; i + 1 < table.size(); ++i)
            require(table[i].dom.hi == table[i + 1].dom.lo,
                    "pieces must tile the state space");
    }
}

double Observable::eval(std::size_t sym, double x) const {
    const auto& table = pieces_[sym];
    for (std::size_t i = 0; i < table.size(); ++i) {
        bool last = i + 1 == table.size();
        if (x >= table[i].dom.lo && (x < table[i].dom.hi || (last && x <= table[i].dom.hi)))
            return table[i].eval(x);
    }
    throw std::invalid_argument("point outside observable domain");
}

double Observable::integral(std::size_t sym, const Interval& iv) const {
    double s = 0.0;
    for (const PolyPiece& p : pieces_[sym]) {
        Interval overlap = intersect(p.dom, iv);
        if (overlap.length() > 0.0) s += piece_integral(p, overlap.lo, overlap.hi);
    }
    return s;
}

double Observable::integral_squared(std::size_t sym, const Interval& iv) const {
    double s = 0.0;
    for (const PolyPiece& p : pieces_[sym]) {
        Interval overlap = intersect(p.dom, iv);
        if (overlap.length() > 0.0) s += piece_integral_squared(p, overlap.lo, overlap.hi);
    }
    return s;
}

void Observable::shift(std::size_t sym, double c) {
    for (PolyPiece& p : pieces_[sym]) p.coeff[0] += c;
}

PsiVector PsiVector::compute(const Observable& psi, const Environment& env) {
    const std::size_t m = env.state_count();
    const std::size_t n_sym = env.alphabet().size();
    PsiVector out;
    out.per_symbol.assign(n_sym, std::vector<double>(m, 0.0));
    out.averaged.assign(m, 0.0);
    auto maps = env.maps_per_symbol(0.0);
    for (std::size_t s = 0; s < n_sym; ++s) {
        std::size_t psi_sym = psi.symbol_count() == 1 ? 0 : s;
        for (std::size_t j = 0; j < m; ++j) {
            Interval ij = maps[0].state_interval(j);
            // uniform phi_j = 1/|I_j|
            out.per_symbol[s][j] = psi.integral(psi_sym, ij) / ij.length();
            out.averaged[j] += env.alphabet().probs[s] * out.per_symbol[s][j];
        }
    }
    return out;
}

Observable center_fibrewise(Observable psi, const std::vector<double>& p,
                            const Environment& env) {
    PsiVector vec = PsiVector::compute(psi, env);
    if (psi.symbol_count() == 1 && env.alphabet().size() > 1) {
        // one shared table: subtract the probability-averaged constant
        double c = 0.0;
        for (std::size_t s = 0; s < env.alphabet().size(); ++s)
            for (std::size_t j = 0; j < p.size(); ++j)
                c += env.alphabet().probs[s] * p[j] * vec.per_symbol[s][j];
        psi.shift(0, -c);
        return psi;
    }
    for (std::size_t s = 0; s < psi.symbol_count(); ++s) {
        double c = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) c += p[j] * vec.per_symbol[s][j];
        psi.shift(s, -c);
    }
    return psi;
}

ObservableCellTables ObservableCellTables::compute(const Observable& psi, const Grid& grid) {
    ObservableCellTables t;
    const std::size_t n_sym = psi.symbol_count();
    t.mean.assign(n_sym, std::vector<double>(grid.cell_count(), 0.0));
    t.mean_sq.assign(n_sym, std::vector<double>(grid.cell_count(), 0.0));
    for (std::size_t s = 0; s < n_sym; ++s)
        for (std::size_t k = 0; k < grid.cell_count(); ++k) {
            Interval cell = grid.cell(k);
            double inv = 1.0 / cell.length();
            t.mean[s][k] = psi.integral(s, cell) * inv;
            t.mean_sq[s][k] = psi.integral_squared(s, cell) * inv;
        }
    return t;
}

Observable make_step_observable(const Environment& env, const std::vector<double>& values) {
    auto maps = env.maps_per_symbol(0.0);
    require(values.size() == env.state_count(), "one value per state required");
    std::vector<PolyPiece> table;
    for (std::size_t j = 0; j < values.size(); ++j) {
        PolyPiece p;
        p.dom = maps[0].state_interval(j);
        p.coeff = {values[j], 0.0, 0.0, 0.0};
        table.push_back(p);
    }
    double sup = 0.0;
    for (double v : values) sup = std::max(sup, std::abs(v));
    double var = 0.0;
    for (std::size_t j = 0; j + 1 < values.size(); ++j)
        var += std::abs(values[j + 1] - values[j]);
    return Observable({table}, sup, var);
}

}  // namespace metastable
