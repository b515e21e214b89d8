#pragma once

#include "realize/error.hpp"
#include "realize/tolerances.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace realize {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/**
Dense linear program

    maximize    c . x
    subject to  A_ineq x <= b_ineq
                A_eq   x  = b_eq
                lower <= x <= upper      (bounds may be infinite)
*/
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> ineq_lhs;
    std::vector<double> ineq_rhs;
    std::vector<std::vector<double>> eq_lhs;
    std::vector<double> eq_rhs;
    std::vector<double> lower;
    std::vector<double> upper;

    LinearProgram() = default;

    /// n variables, zero objective, all variables non-negative.
    explicit LinearProgram(std::size_t n_vars)
        : objective(n_vars, 0.0), lower(n_vars, 0.0), upper(n_vars, infinity) {}

    std::size_t n_vars() const noexcept { return objective.size(); }

    void add_ineq(std::vector<double> row, double rhs) {
        ineq_lhs.push_back(std::move(row));
        ineq_rhs.push_back(rhs);
    }
    void add_eq(std::vector<double> row, double rhs) {
        eq_lhs.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus status) {
    switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;          ///< only meaningful when Optimal
    double objective_value = 0.0;   ///< only meaningful when Optimal
    std::size_t iterations = 0;     ///< pivots over both phases
};

/// Anything that can stand in for the simplex behind the reward designers.
template <class S>
concept LpSolver = requires(const S& solver, const LinearProgram& lp) {
    { solver.solve(lp) } -> std::same_as<LpSolution>;
};

inline void validate_program(const LinearProgram& lp) {
    const std::size_t n = lp.n_vars();
    auto bad = [](double v) { return std::isnan(v); };
    if (lp.lower.size() != n || lp.upper.size() != n)
        throw Error(ErrorKind::MalformedProgram, "bound vectors do not match the variable count");
    if (lp.ineq_lhs.size() != lp.ineq_rhs.size() || lp.eq_lhs.size() != lp.eq_rhs.size())
        throw Error(ErrorKind::MalformedProgram, "row and right-hand-side counts differ");
    for (double c : lp.objective)
        if (!std::isfinite(c)) throw Error(ErrorKind::MalformedProgram, "non-finite objective coefficient");
    for (const auto* rows : {&lp.ineq_lhs, &lp.eq_lhs})
        for (const auto& row : *rows) {
            if (row.size() != n) throw Error(ErrorKind::MalformedProgram, "constraint row has wrong width");
            for (double v : row)
                if (!std::isfinite(v)) throw Error(ErrorKind::MalformedProgram, "non-finite constraint coefficient");
        }
    for (const auto* rhs : {&lp.ineq_rhs, &lp.eq_rhs})
        for (double v : *rhs)
            if (!std::isfinite(v)) throw Error(ErrorKind::MalformedProgram, "non-finite right-hand side");
    for (std::size_t j = 0; j < n; ++j) {
        if (bad(lp.lower[j]) || bad(lp.upper[j]) || lp.lower[j] == infinity || lp.upper[j] == -infinity)
            throw Error(ErrorKind::MalformedProgram, "invalid bound on variable " + std::to_string(j));
    }
}

/**
Two-phase dense tableau simplex with Bland's entering rule.

Variables are shifted or split into non-negative columns, finite upper
bounds become explicit rows, and phase one minimises the sum of
artificials. The entering column is the smallest index with a positive
reduced cost. The leaving row comes from a two-pass ratio test that takes
the largest pivot element among near-ties, so degenerate programs never
pivot on roundoff. The fixed pivot order makes every solve bitwise
reproducible.
*/
class SimplexSolver {
public:
    struct Options {
        double feasibility = 1e-9;
        double pivot = 1e-10;
        std::size_t max_iterations = 1'000'000;
        double relative_pivot = 1e-7;
        double harris = 1e-11;
        double redundancy = 1e-9;
    };

    SimplexSolver() = default;
    explicit SimplexSolver(Options options) : options_(options) {}
    explicit SimplexSolver(const Tolerances& tol) : options_{tol.feasibility, tol.pivot, 1'000'000, 1e-7, 1e-11, 1e-9} {}

    LpSolution solve(const LinearProgram& lp) const;

private:
    Options options_;
};

namespace detail {

/// x_j = offset + sum coef * y_k over the standard-form columns y >= 0.
struct VariableMap {
    double offset = 0.0;
    std::vector<std::pair<std::size_t, double>> columns;
};

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double rhs(std::size_t r) const { return at(r, cols_); }
    /// The objective row lives at index rows_: reduced costs, and -z in the rhs slot.
    std::size_t objective_row() const noexcept { return rows_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const std::size_t width = cols_ + 1;
        double* prow = &data_[pr * width];
        const double inv = 1.0 / prow[pc];
        for (std::size_t c = 0; c < width; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            double* row = &data_[r * width];
            const double factor = row[pc];
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < width; ++c) row[c] -= factor * prow[c];
            row[pc] = 0.0;
        }
    }

    /// Drops a constraint row (used for redundant equality rows after phase one).
    void erase_row(std::size_t r) {
        const std::size_t width = cols_ + 1;
        data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * width),
                    data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * width));
        --rows_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

enum class PhaseResult { Optimal, Unbounded };

/// Pivots until no allowed column has a positive reduced cost.
inline PhaseResult run_phase(Tableau& t, std::vector<std::size_t>& basis, std::size_t allowed_cols,
                             const SimplexSolver::Options& options, std::size_t& iterations) {
    const std::size_t obj = t.objective_row();
    while (true) {
        std::size_t entering = allowed_cols;
        for (std::size_t c = 0; c < allowed_cols; ++c) {
            if (t.at(obj, c) > options.pivot) {
                entering = c;
                break;
            }
        }
        if (entering == allowed_cols) return PhaseResult::Optimal;

        // Two-pass ratio test: bound the step with a small feasibility allowance,
        // then take the largest pivot element among rows within that bound.
        double column_max = 0.0;
        for (std::size_t r = 0; r < t.rows(); ++r) column_max = std::max(column_max, t.at(r, entering));
        const double min_pivot = std::max(options.pivot, options.relative_pivot * column_max);
        double bound = infinity;
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double coef = t.at(r, entering);
            if (coef > min_pivot) bound = std::min(bound, (std::max(0.0, t.rhs(r)) + options.harris) / coef);
        }
        std::size_t leaving = t.rows();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double coef = t.at(r, entering);
            if (coef <= min_pivot || std::max(0.0, t.rhs(r)) / coef > bound) continue;
            if (leaving == t.rows() || coef > t.at(leaving, entering) ||
                (coef == t.at(leaving, entering) && basis[r] < basis[leaving]))
                leaving = r;
        }
        if (leaving == t.rows()) return PhaseResult::Unbounded;

        // A basic value within the allowance below zero is shifted up so the step never goes backwards.
        t.rhs(leaving) = std::max(0.0, t.rhs(leaving));
        t.pivot(leaving, entering);
        basis[leaving] = entering;
        if (++iterations > options.max_iterations)
            throw Error(ErrorKind::MalformedProgram, "simplex iteration limit exceeded");
    }
}

} // namespace detail

inline LpSolution SimplexSolver::solve(const LinearProgram& lp) const {
    validate_program(lp);
    const std::size_t n = lp.n_vars();

    // Map every original variable onto non-negative standard-form columns.
    std::vector<detail::VariableMap> maps(n);
    std::size_t n_struct = 0;
    std::vector<std::pair<std::size_t, double>> upper_rows; // (column, bound) for y_k <= bound
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower[j];
        const double hi = lp.upper[j];
        if (std::isfinite(lo)) {
            maps[j].offset = lo;
            maps[j].columns.push_back({n_struct, 1.0});
            if (std::isfinite(hi)) upper_rows.push_back({n_struct, hi - lo});
            ++n_struct;
        } else if (std::isfinite(hi)) {
            maps[j].offset = hi;
            maps[j].columns.push_back({n_struct++, -1.0});
        } else {
            maps[j].columns.push_back({n_struct++, 1.0});
            maps[j].columns.push_back({n_struct++, -1.0});
        }
        if (std::isfinite(lo) && std::isfinite(hi) && hi < lo) {
            LpSolution infeasible;
            infeasible.status = LpStatus::Infeasible;
            return infeasible;
        }
    }

    auto transform = [&](const std::vector<double>& row, double rhs) {
        std::vector<double> out(n_struct, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (row[j] == 0.0) continue;
            rhs -= row[j] * maps[j].offset;
            for (auto [col, coef] : maps[j].columns) out[col] += row[j] * coef;
        }
        return std::make_pair(std::move(out), rhs);
    };

    std::vector<std::pair<std::vector<double>, double>> ineq_rows;
    for (std::size_t i = 0; i < lp.ineq_lhs.size(); ++i) ineq_rows.push_back(transform(lp.ineq_lhs[i], lp.ineq_rhs[i]));
    for (auto [col, bound] : upper_rows) {
        std::vector<double> row(n_struct, 0.0);
        row[col] = 1.0;
        ineq_rows.push_back({std::move(row), bound});
    }
    std::vector<std::pair<std::vector<double>, double>> eq_rows;
    for (std::size_t i = 0; i < lp.eq_lhs.size(); ++i) eq_rows.push_back(transform(lp.eq_lhs[i], lp.eq_rhs[i]));

    // Columns: structural | one slack per inequality | artificials.
    const std::size_t n_slack = ineq_rows.size();
    const std::size_t m = ineq_rows.size() + eq_rows.size();
    std::size_t n_art = 0;
    for (const auto& [row, rhs] : ineq_rows)
        if (rhs < 0.0) ++n_art;
    n_art += eq_rows.size();
    const std::size_t art_begin = n_struct + n_slack;
    const std::size_t n_cols = art_begin + n_art;

    detail::Tableau t(m, n_cols);
    std::vector<std::size_t> basis(m);
    std::size_t next_art = art_begin;
    for (std::size_t i = 0; i < ineq_rows.size(); ++i) {
        const auto& [row, rhs] = ineq_rows[i];
        const double sign = rhs < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < n_struct; ++c) t.at(i, c) = sign * row[c];
        t.at(i, n_struct + i) = sign;
        t.rhs(i) = sign * rhs;
        if (sign > 0.0) {
            basis[i] = n_struct + i;
        } else {
            t.at(i, next_art) = 1.0;
            basis[i] = next_art++;
        }
    }
    for (std::size_t k = 0; k < eq_rows.size(); ++k) {
        const std::size_t i = ineq_rows.size() + k;
        const auto& [row, rhs] = eq_rows[k];
        const double sign = rhs < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < n_struct; ++c) t.at(i, c) = sign * row[c];
        t.rhs(i) = sign * rhs;
        t.at(i, next_art) = 1.0;
        basis[i] = next_art++;
    }

    LpSolution solution;
    const std::size_t obj = t.objective_row();

    double rhs_scale = 1.0;
    for (std::size_t i = 0; i < m; ++i) rhs_scale = std::max(rhs_scale, std::abs(t.rhs(i)));

    // Phase one: maximise -sum(artificials).
    if (n_art > 0) {
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] < art_begin) continue;
            for (std::size_t c = 0; c < n_cols; ++c) t.at(obj, c) += t.at(i, c);
            t.rhs(obj) += t.rhs(i);
        }
        for (std::size_t c = art_begin; c < n_cols; ++c) t.at(obj, c) = 0.0;
        detail::run_phase(t, basis, n_cols, options_, solution.iterations);
        // rhs(obj) holds -z = sum of artificials remaining.
        if (t.rhs(obj) > options_.feasibility * rhs_scale) {
            solution.status = LpStatus::Infeasible;
            return solution;
        }
        // Drive remaining zero-level artificials out of the basis, dropping redundant rows.
        for (std::size_t r = 0; r < t.rows();) {
            if (basis[r] < art_begin) {
                ++r;
                continue;
            }
            // Largest entry of the row; anything at roundoff level marks the row as redundant.
            std::size_t col = art_begin;
            double row_max = 0.0;
            for (std::size_t c = 0; c < art_begin; ++c) {
                if (std::abs(t.at(r, c)) > row_max) {
                    row_max = std::abs(t.at(r, c));
                    col = c;
                }
            }
            if (row_max <= options_.redundancy) col = art_begin;
            if (col < art_begin) {
                t.pivot(r, col);
                basis[r] = col;
                ++r;
            } else {
                t.erase_row(r);
                basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
            }
        }
    }

    // Phase two objective in standard-form columns.
    std::vector<double> cost(n_cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (auto [col, coef] : maps[j].columns) cost[col] += lp.objective[j] * coef;
    }
    const std::size_t objr = t.objective_row();
    for (std::size_t c = 0; c <= n_cols; ++c) t.at(objr, c) = 0.0;
    for (std::size_t c = 0; c < art_begin; ++c) t.at(objr, c) = cost[c];
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double cb = cost[basis[r]];
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c <= n_cols; ++c) t.at(objr, c) -= cb * t.at(r, c);
    }
    for (std::size_t c = art_begin; c < n_cols; ++c) t.at(objr, c) = 0.0;

    if (detail::run_phase(t, basis, art_begin, options_, solution.iterations) == detail::PhaseResult::Unbounded) {
        solution.status = LpStatus::Unbounded;
        return solution;
    }

    std::vector<double> y(n_cols, 0.0);
    for (std::size_t r = 0; r < t.rows(); ++r) y[basis[r]] = std::max(0.0, t.rhs(r));
    solution.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double v = maps[j].offset;
        for (auto [col, coef] : maps[j].columns) v += coef * y[col];
        solution.x[j] = std::clamp(v, lp.lower[j], lp.upper[j]);
    }
    solution.objective_value = 0.0;
    for (std::size_t j = 0; j < n; ++j) solution.objective_value += lp.objective[j] * solution.x[j];
    solution.status = LpStatus::Optimal;
    return solution;
}

/// Plain-text dump: objective, bounds, then one constraint per line.
inline void dump_program(std::ostream& out, const LinearProgram& lp) {
    auto write_row = [&](const std::vector<double>& row) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
    };
    out.precision(17);
    out << "vars " << lp.n_vars() << "\n";
    out << "maximize ";
    write_row(lp.objective);
    out << "\n";
    for (std::size_t j = 0; j < lp.n_vars(); ++j) out << "bound " << j << " " << lp.lower[j] << " " << lp.upper[j] << "\n";
    for (std::size_t i = 0; i < lp.ineq_lhs.size(); ++i) {
        out << "ineq ";
        write_row(lp.ineq_lhs[i]);
        out << " <= " << lp.ineq_rhs[i] << "\n";
    }
    for (std::size_t i = 0; i < lp.eq_lhs.size(); ++i) {
        out << "eq ";
        write_row(lp.eq_lhs[i]);
        out << " = " << lp.eq_rhs[i] << "\n";
    }
}

} // namespace realize
