#pragma once

#include "cma/poly.hpp"
#include "cma/rational.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace cma {

enum class Rel { EQ, GE, LE };  // f rel 0

struct LPConstraint {
    AffineForm f;
    Rel rel = Rel::EQ;
    std::string tag;
};

struct LPProblem {
    std::vector<std::string> names;
    std::vector<bool> nonneg;
    std::vector<LPConstraint> cons;
    AffineForm objective;
    bool minimize = true;

    int add_var(std::string name, bool is_nonneg = false) {
        names.push_back(std::move(name));
        nonneg.push_back(is_nonneg);
        return static_cast<int>(names.size()) - 1;
    }
    void add(AffineForm f, Rel rel, std::string tag = {}) { cons.push_back({std::move(f), rel, std::move(tag)}); }
    std::size_t num_vars() const { return names.size(); }
};

enum class LPStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* to_string(LPStatus s) {
    switch (s) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
        case LPStatus::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    std::vector<Rational> x;
    Rational objective = 0;
    bool exact = false;           // every constraint holds exactly in rationals
    double max_violation = 0.0;   // largest residual when not exact
};

// ---------------------------------------------------------------------------

template <class T>
struct NumTraits {
    static T tol() { return T(1e-9); }
    static constexpr bool is_exact() { return false; }
    static T from(const Rational& r) { return static_cast<T>(to_ldouble(r)); }
    static T abs(const T& v) { return v < 0 ? -v : v; }
};

template <>
struct NumTraits<Rational> {
    static Rational tol() { return 0; }
    static constexpr bool is_exact() { return true; }
    static Rational from(const Rational& r) { return r; }
    static Rational abs(const Rational& v) { return ::abs(v); }
};

// Dense tableau simplex for  min c.y  s.t.  A y = b, y >= 0, b >= 0.
// Dantzig pricing. In floating point a stall perturbs the right-hand side
// (an unperturbed copy is carried along as an extra column and restored on
// exit); a second stall, or any stall in exact arithmetic, switches to
// Bland's rule.
template <class T>
class DenseSimplex {
public:
    enum class Result { Optimal, Infeasible, Unbounded, IterationLimit };

    DenseSimplex(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), width_(cols + rows + 2) {
        tab_.assign((m_ + 1) * width_, T(0));
        basis_.assign(m_, 0);
        active_.assign(m_, true);
    }

    T& a(std::size_t i, std::size_t j) { return tab_[i * width_ + j]; }
    const T& a(std::size_t i, std::size_t j) const { return tab_[i * width_ + j]; }
    T& rhs(std::size_t i) { return tab_[i * width_ + width_ - 1]; }
    const T& rhs(std::size_t i) const { return tab_[i * width_ + width_ - 1]; }
    T& shadow(std::size_t i) { return tab_[i * width_ + width_ - 2]; }

    // phase 1; fills a basis free of artificials, dropping redundant rows
    Result phase1() {
        const T tol = NumTraits<T>::tol();
        for (std::size_t i = 0; i < m_; ++i) {
            a(i, n_ + i) = T(1);
            basis_[i] = n_ + i;
            shadow(i) = rhs(i);
        }
        artificial_allowed_ = true;
        T* obj = &tab_[m_ * width_];
        for (std::size_t j = 0; j < width_; ++j) obj[j] = T(0);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < width_; ++j)
                if (j < n_ || j >= width_ - 2) obj[j] -= a(i, j);
        Result r = iterate(n_ + m_, true);
        if (r == Result::IterationLimit) return r;
        T infeas = -obj[width_ - 1];
        if (NumTraits<T>::abs(infeas) > (NumTraits<T>::is_exact() ? T(0) : T(1e-7))) return Result::Infeasible;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            std::size_t best = n_;
            T bestv = tol;
            for (std::size_t j = 0; j < n_; ++j) {
                T v = NumTraits<T>::abs(a(i, j));
                if (v > bestv) {
                    bestv = v;
                    best = j;
                }
            }
            if (best < n_) {
                pivot(i, best);
            } else {
                active_[i] = false;
            }
        }
        artificial_allowed_ = false;
        return Result::Optimal;
    }

    // phase 2 from the current basis with objective c (length n)
    Result phase2(const std::vector<T>& c) {
        T* obj = &tab_[m_ * width_];
        for (std::size_t j = 0; j < width_; ++j) obj[j] = T(0);
        for (std::size_t j = 0; j < n_; ++j) obj[j] = c[j];
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_[i]) continue;
            std::size_t bj = basis_[i];
            if (bj >= n_) continue;
            T cb = obj[bj];
            if (cb == T(0)) continue;
            for (std::size_t j = 0; j < width_; ++j) obj[j] -= cb * a(i, j);
        }
        return iterate(n_);
    }

    T objective_value() const { return -tab_[m_ * width_ + width_ - 1]; }

    std::vector<T> primal() const {
        std::vector<T> y(n_, T(0));
        for (std::size_t i = 0; i < m_; ++i)
            if (active_[i] && basis_[i] < n_) y[basis_[i]] = rhs(i);
        return y;
    }
    const std::vector<std::size_t>& basis() const { return basis_; }
    const std::vector<bool>& active() const { return active_; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::size_t pivots() const { return pivots_; }

private:
    std::size_t m_, n_, width_;
    std::vector<T> tab_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
    bool artificial_allowed_ = false;
    bool perturbed_ = false;
    std::size_t pivots_ = 0;

    void pivot(std::size_t r, std::size_t c) {
        ++pivots_;
        T* pr = &tab_[r * width_];
        T inv = T(1) / pr[c];
        for (std::size_t j = 0; j < width_; ++j)
            if (pr[j] != T(0)) pr[j] *= inv;
        pr[c] = T(1);
        std::vector<std::size_t> nz;
        nz.reserve(width_);
        for (std::size_t j = 0; j < width_; ++j)
            if (pr[j] != T(0)) nz.push_back(j);
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            T* row = &tab_[i * width_];
            T f = row[c];
            if (f == T(0)) continue;
            for (std::size_t j : nz) row[j] -= f * pr[j];
            row[c] = T(0);
            if constexpr (!std::is_same_v<T, Rational>) {
                for (std::size_t j : nz)
                    if (row[j] != T(0) && NumTraits<T>::abs(row[j]) < T(1e-13)) row[j] = T(0);
            }
        }
        basis_[r] = c;
    }

    void perturb() {
        std::mt19937_64 rng(0x5eed + pivots_);
        std::uniform_real_distribution<double> u(1.0, 2.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (active_[i]) rhs(i) += T(1e-7) * (T(1) + NumTraits<T>::abs(rhs(i))) * T(u(rng));
    }

    // drops the perturbation; false if the basis is infeasible without it
    bool unperturb() {
        bool ok = true;
        for (std::size_t i = 0; i <= m_; ++i) {
            rhs(i) = shadow(i);
            if (i == m_ || !active_[i] || !(rhs(i) < T(0))) continue;
            if (rhs(i) > T(-1e-7)) rhs(i) = T(0);
            else ok = false;
        }
        return ok;
    }

    Result iterate(std::size_t ncols, bool feasibility = false) {
        Result r = iterate_perturbed(ncols, feasibility);
        if (perturbed_) {
            perturbed_ = false;
            if (!unperturb() && r == Result::Optimal) r = Result::IterationLimit;
        }
        return r;
    }

    Result iterate_perturbed(std::size_t ncols, bool feasibility) {
        const T tol = NumTraits<T>::tol();
        const T* obj = &tab_[m_ * width_];
        std::size_t degenerate_run = 0;
        bool bland = false;
        std::size_t limit = 50000 + 200 * (m_ + n_);
        for (std::size_t it = 0; it < limit; ++it) {
            if (feasibility && NumTraits<T>::abs(obj[width_ - 2]) <= tol) return Result::Optimal;
            std::size_t enter = ncols;
            if (bland) {
                for (std::size_t j = 0; j < ncols; ++j)
                    if (obj[j] < -tol) {
                        enter = j;
                        break;
                    }
            } else {
                T best = -tol;
                for (std::size_t j = 0; j < ncols; ++j)
                    if (obj[j] < best) {
                        best = obj[j];
                        enter = j;
                    }
            }
            if (enter == ncols) return Result::Optimal;
            std::size_t leave = m_;
            T best_ratio = T(0);
            if constexpr (NumTraits<T>::is_exact()) {
                for (std::size_t i = 0; i < m_; ++i) {
                    if (!active_[i]) continue;
                    T v = a(i, enter);
                    if (!(v > T(0))) continue;
                    T ratio = rhs(i) / v;
                    if (leave == m_ || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[leave])) {
                        leave = i;
                        best_ratio = ratio;
                    }
                }
            } else {
                // two-pass ratio test: bound the step with a small feasibility
                // slack, then take the largest pivot within that bound
                const T slack = T(1e-9);
                T bound = T(0);
                bool any = false;
                for (std::size_t i = 0; i < m_; ++i) {
                    if (!active_[i]) continue;
                    T v = a(i, enter);
                    if (!(v > tol)) continue;
                    T r = (std::max(rhs(i), T(0)) + slack) / v;
                    if (!any || r < bound) bound = r;
                    any = true;
                }
                for (std::size_t i = 0; any && i < m_; ++i) {
                    if (!active_[i]) continue;
                    T v = a(i, enter);
                    if (!(v > tol) || std::max(rhs(i), T(0)) / v > bound) continue;
                    if (leave == m_ || v > a(leave, enter)) leave = i;
                }
                if (leave != m_) best_ratio = std::max(rhs(leave), T(0)) / a(leave, enter);
            }
            if (leave == m_) return Result::Unbounded;
            if (best_ratio <= tol) {
                if (++degenerate_run > 50) {
                    if (!NumTraits<T>::is_exact() && !perturbed_) {
                        perturb();
                        perturbed_ = true;
                    } else {
                        bland = true;
                    }
                    degenerate_run = 0;
                }
            } else {
                degenerate_run = 0;
            }
            pivot(leave, enter);
            if constexpr (!NumTraits<T>::is_exact()) {
                for (std::size_t i = 0; i < m_; ++i)
                    if (rhs(i) < T(0) && rhs(i) > T(-1e-7)) rhs(i) = T(0);
            }
        }
        return Result::IterationLimit;
    }
};

// ---------------------------------------------------------------------------
// Presolve: exact elimination of free variables through equality rows.

struct SparseRow {
    std::map<int, Rational> a;
    Rational c = 0;
    Rel rel = Rel::EQ;
};

struct Elimination {
    int var;
    std::map<int, Rational> a;  // var = c + sum a_k x_k
    Rational c;
};

struct PresolvedLP {
    std::vector<SparseRow> rows;
    std::vector<Elimination> elim;
    bool infeasible = false;
    std::string infeasible_tag;
};

inline PresolvedLP presolve(const LPProblem& p) {
    PresolvedLP out;
    std::size_t nv = p.num_vars();
    std::vector<SparseRow> rows;
    rows.reserve(p.cons.size());
    std::vector<std::string> tags;
    for (auto& c : p.cons) {
        SparseRow r;
        for (auto& [v, a] : c.f.terms) r.a.emplace(v, a);
        r.c = c.f.c0;
        r.rel = c.rel;
        rows.push_back(std::move(r));
        tags.push_back(c.tag);
    }
    std::vector<std::set<int>> occ(nv);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (auto& [v, a] : rows[i].a) occ[static_cast<std::size_t>(v)].insert(static_cast<int>(i));
    std::vector<bool> alive(rows.size(), true);

    // candidate equality rows ordered by length
    std::set<std::pair<std::size_t, int>> queue;
    auto has_free = [&](const SparseRow& r) {
        for (auto& [v, a] : r.a)
            if (!p.nonneg[static_cast<std::size_t>(v)]) return true;
        return false;
    };
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].rel == Rel::EQ && has_free(rows[i])) queue.emplace(rows[i].a.size(), static_cast<int>(i));

    while (!queue.empty()) {
        auto [len, ri] = *queue.begin();
        queue.erase(queue.begin());
        SparseRow& r = rows[static_cast<std::size_t>(ri)];
        if (!alive[static_cast<std::size_t>(ri)] || r.a.size() != len) continue;
        int piv = -1;
        std::size_t best = std::numeric_limits<std::size_t>::max();
        for (auto& [v, a] : r.a) {
            if (p.nonneg[static_cast<std::size_t>(v)]) continue;
            std::size_t o = occ[static_cast<std::size_t>(v)].size();
            if (o < best) {
                best = o;
                piv = v;
            }
        }
        if (piv < 0) continue;
        Rational ap = r.a.at(piv);
        Elimination e;
        e.var = piv;
        e.c = -r.c / ap;
        for (auto& [v, a] : r.a)
            if (v != piv) e.a.emplace(v, -a / ap);
        alive[static_cast<std::size_t>(ri)] = false;
        for (auto& [v, a] : r.a) occ[static_cast<std::size_t>(v)].erase(ri);
        std::vector<int> targets(occ[static_cast<std::size_t>(piv)].begin(), occ[static_cast<std::size_t>(piv)].end());
        for (int ti : targets) {
            SparseRow& t = rows[static_cast<std::size_t>(ti)];
            Rational f = t.a.at(piv);
            t.a.erase(piv);
            t.c += f * e.c;
            for (auto& [v, a] : e.a) {
                auto it = t.a.find(v);
                if (it == t.a.end()) {
                    t.a.emplace(v, f * a);
                    occ[static_cast<std::size_t>(v)].insert(ti);
                } else {
                    it->second += f * a;
                    if (it->second == 0) {
                        t.a.erase(it);
                        occ[static_cast<std::size_t>(v)].erase(ti);
                    }
                }
            }
            if (t.rel == Rel::EQ && has_free(t)) queue.emplace(t.a.size(), ti);
        }
        occ[static_cast<std::size_t>(piv)].clear();
        out.elim.push_back(std::move(e));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!alive[i]) continue;
        SparseRow& r = rows[i];
        if (r.a.empty()) {
            bool ok = r.rel == Rel::EQ ? r.c == 0 : (r.rel == Rel::GE ? r.c >= 0 : r.c <= 0);
            if (!ok) {
                out.infeasible = true;
                if (out.infeasible_tag.empty()) out.infeasible_tag = tags[i];
            }
            continue;
        }
        out.rows.push_back(std::move(r));
    }
    return out;
}

inline AffineForm substitute_eliminated(const AffineForm& f, const std::vector<Elimination>& elim) {
    std::map<int, Rational> a;
    for (auto& [v, c] : f.terms) a.emplace(v, c);
    Rational c0 = f.c0;
    for (auto& e : elim) {
        auto it = a.find(e.var);
        if (it == a.end()) continue;
        Rational k = it->second;
        a.erase(it);
        c0 += k * e.c;
        for (auto& [v, c] : e.a) {
            auto jt = a.find(v);
            if (jt == a.end())
                a.emplace(v, k * c);
            else {
                jt->second += k * c;
                if (jt->second == 0) a.erase(jt);
            }
        }
    }
    AffineForm r(c0);
    for (auto& [v, c] : a) r.terms.emplace_back(v, c);
    return r;
}

// Residual check of every constraint at x; returns max |violation|.
inline Rational max_violation(const LPProblem& p, const std::vector<Rational>& x) {
    Rational worst = 0;
    for (auto& c : p.cons) {
        Rational v = c.f.eval(x);
        Rational viol = 0;
        if (c.rel == Rel::EQ) viol = abs(v);
        else if (c.rel == Rel::GE && v < 0) viol = -v;
        else if (c.rel == Rel::LE && v > 0) viol = v;
        if (viol > worst) worst = viol;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        if (p.nonneg[i] && x[i] < 0 && -x[i] > worst) worst = -x[i];
    return worst;
}

// Solves one feasible region for several objectives, sharing presolve and phase 1.
class LPSession {
public:
    explicit LPSession(const LPProblem& p) : p_(p), pre_(presolve(p)) { setup(); }

    const PresolvedLP& presolved() const { return pre_; }
    std::size_t reduced_rows() const { return A_.size(); }
    std::size_t reduced_cols() const { return ncols_; }

    LPSolution solve(const AffineForm& objective, bool minimize) {
        LPSolution s;
        if (pre_.infeasible) {
            s.status = LPStatus::Infeasible;
            return s;
        }
        if (!phase1_done_) run_phase1();
        if (phase1_result_ != DenseSimplex<long double>::Result::Optimal) {
            s.status = phase1_result_ == DenseSimplex<long double>::Result::Infeasible ? LPStatus::Infeasible
                                                                                      : LPStatus::NumericalFailure;
            if (s.status == LPStatus::NumericalFailure) return exact_fallback(objective, minimize);
            return s;
        }
        AffineForm obj = substitute_eliminated(objective, pre_.elim);
        if (!minimize) obj *= Rational(-1);
        std::vector<Rational> c(ncols_, Rational(0));
        for (auto& [v, a] : obj.terms) {
            auto it = col_of_.find(v);
            if (it == col_of_.end()) {
                if (a != 0) {
                    if (p_.nonneg[static_cast<std::size_t>(v)] && a > 0) continue;  // stays at 0
                    s.status = LPStatus::Unbounded;
                    return s;
                }
                continue;
            }
            c[it->second.first] += a;
            if (it->second.second != SIZE_MAX) c[it->second.second] -= a;
        }
        DenseSimplex<long double> sx = *phase1_;
        std::vector<long double> cd(ncols_);
        for (std::size_t j = 0; j < ncols_; ++j) cd[j] = NumTraits<long double>::from(c[j]);
        auto r = sx.phase2(cd);
        if (r == DenseSimplex<long double>::Result::Unbounded) {
            s.status = LPStatus::Unbounded;
            return s;
        }
        if (r != DenseSimplex<long double>::Result::Optimal) return exact_fallback(objective, minimize);
        auto y = recover(sx);
        if (!y) return exact_fallback(objective, minimize);
        return finish(*y, objective, true);
    }

private:
    const LPProblem& p_;
    PresolvedLP pre_;
    std::vector<SparseRow> rows_;      // standardized: sum a y (=) b with slack columns
    std::vector<Rational> b_;
    std::vector<std::map<std::size_t, Rational>> A_;
    std::map<int, std::pair<std::size_t, std::size_t>> col_of_;  // var -> (plus col, minus col or SIZE_MAX)
    std::size_t ncols_ = 0;
    bool phase1_done_ = false;
    DenseSimplex<long double>::Result phase1_result_ = DenseSimplex<long double>::Result::Optimal;
    std::optional<DenseSimplex<long double>> phase1_;

    void setup() {
        std::set<int> used;
        for (auto& r : pre_.rows)
            for (auto& [v, a] : r.a) used.insert(v);
        for (int v : used) {
            std::size_t plus = ncols_++;
            std::size_t minus = SIZE_MAX;
            if (!p_.nonneg[static_cast<std::size_t>(v)]) minus = ncols_++;
            col_of_[v] = {plus, minus};
        }
        for (auto& r : pre_.rows) {
            std::map<std::size_t, Rational> row;
            for (auto& [v, a] : r.a) {
                auto [pc, mc] = col_of_.at(v);
                row[pc] += a;
                if (mc != SIZE_MAX) row[mc] -= a;
            }
            if (r.rel != Rel::EQ) {
                std::size_t s = ncols_++;
                row[s] = r.rel == Rel::GE ? Rational(-1) : Rational(1);
            }
            Rational b = -r.c;
            if (b < 0) {
                for (auto& [j, a] : row) a = -a;
                b = -b;
            }
            A_.push_back(std::move(row));
            b_.push_back(b);
        }
    }

    void run_phase1() {
        phase1_done_ = true;
        phase1_.emplace(A_.size(), ncols_);
        for (std::size_t i = 0; i < A_.size(); ++i) {
            for (auto& [j, a] : A_[i]) phase1_->a(i, j) = NumTraits<long double>::from(a);
            phase1_->rhs(i) = NumTraits<long double>::from(b_[i]);
        }
        phase1_result_ = phase1_->phase1();
    }

    bool exact_feasible(const std::vector<Rational>& y) const {
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[j] < 0) return false;
        for (std::size_t i = 0; i < A_.size(); ++i) {
            Rational s = 0;
            for (auto& [j, a] : A_[i]) s += a * y[j];
            if (s != b_[i]) return false;
        }
        return true;
    }

    // exact vertex from the floating basis: rationalize, else solve B y_B = b
    std::optional<std::vector<Rational>> recover(const DenseSimplex<long double>& sx) const {
        auto yd = sx.primal();
        std::vector<Rational> y(ncols_, Rational(0));
        for (std::size_t j = 0; j < ncols_; ++j)
            if (yd[j] != 0) y[j] = rationalize(yd[j], mpz_class("1000000000000"));
        if (exact_feasible(y)) return y;
        std::vector<std::size_t> rowsel, colsel;
        for (std::size_t i = 0; i < sx.rows(); ++i)
            if (sx.active()[i] && sx.basis()[i] < ncols_) {
                rowsel.push_back(i);
                colsel.push_back(sx.basis()[i]);
            }
        auto yb = solve_exact_basis(rowsel, colsel);
        if (yb) {
            std::vector<Rational> z(ncols_, Rational(0));
            for (std::size_t k = 0; k < colsel.size(); ++k) z[colsel[k]] = (*yb)[k];
            if (exact_feasible(z)) return z;
        }
        return std::nullopt;
    }

    std::optional<std::vector<Rational>> solve_exact_basis(const std::vector<std::size_t>& rowsel,
                                                           const std::vector<std::size_t>& colsel) const {
        // B restricted to the selected active rows; dropped rows are redundant
        std::size_t k = colsel.size();
        std::map<std::size_t, std::size_t> pos;
        for (std::size_t c = 0; c < k; ++c) pos[colsel[c]] = c;
        std::vector<std::map<std::size_t, Rational>> M(k);
        std::vector<Rational> rhs(k);
        for (std::size_t r = 0; r < k; ++r) {
            for (auto& [j, a] : A_[rowsel[r]]) {
                auto it = pos.find(j);
                if (it != pos.end()) M[r][it->second] = a;
            }
            rhs[r] = b_[rowsel[r]];
        }
        // sparse Gaussian elimination with partial pivot by fewest entries
        std::vector<std::size_t> piv_row(k, SIZE_MAX);
        std::vector<bool> used(k, false);
        for (std::size_t c = 0; c < k; ++c) {
            std::size_t best = SIZE_MAX, bestlen = SIZE_MAX;
            for (std::size_t r = 0; r < k; ++r) {
                if (used[r]) continue;
                auto it = M[r].find(c);
                if (it == M[r].end() || it->second == 0) continue;
                if (M[r].size() < bestlen) {
                    bestlen = M[r].size();
                    best = r;
                }
            }
            if (best == SIZE_MAX) return std::nullopt;
            used[best] = true;
            piv_row[c] = best;
            Rational pv = M[best].at(c);
            for (std::size_t r = 0; r < k; ++r) {
                if (r == best) continue;
                auto it = M[r].find(c);
                if (it == M[r].end()) continue;
                Rational f = it->second / pv;
                for (auto& [j, a] : M[best]) {
                    Rational& t = M[r][j];
                    t -= f * a;
                }
                for (auto jt = M[r].begin(); jt != M[r].end();)
                    if (jt->second == 0) jt = M[r].erase(jt);
                    else ++jt;
                rhs[r] -= f * rhs[best];
            }
        }
        std::vector<Rational> x(k);
        for (std::size_t c = 0; c < k; ++c) x[c] = rhs[piv_row[c]] / M[piv_row[c]].at(c);
        return x;
    }

    LPSolution finish(const std::vector<Rational>& y, const AffineForm& objective, bool exact) const {
        LPSolution s;
        s.status = LPStatus::Optimal;
        std::vector<Rational> x(p_.num_vars(), Rational(0));
        for (auto& [v, cols] : col_of_) {
            Rational val = y[cols.first];
            if (cols.second != SIZE_MAX) val -= y[cols.second];
            x[static_cast<std::size_t>(v)] = val;
        }
        for (auto it = pre_.elim.rbegin(); it != pre_.elim.rend(); ++it) {
            Rational val = it->c;
            for (auto& [v, a] : it->a) val += a * x[static_cast<std::size_t>(v)];
            x[static_cast<std::size_t>(it->var)] = val;
        }
        Rational viol = max_violation(p_, x);
        s.exact = exact && viol == 0;
        s.max_violation = viol.get_d();
        s.objective = objective.eval(x);
        s.x = std::move(x);
        if (!s.exact && s.max_violation > 1e-7) s.status = LPStatus::NumericalFailure;
        return s;
    }

public:
    // exact rational simplex on the reduced problem
    LPSolution exact_fallback(const AffineForm& objective, bool minimize) const {
        LPSolution s;
        s.status = LPStatus::NumericalFailure;
        if (pre_.infeasible) {
        s.status = LPStatus::Infeasible;
        return s;
    }
    if (A_.size() * (ncols_ + A_.size()) > 400000) return s;
        DenseSimplex<Rational> sx(A_.size(), ncols_);
        for (std::size_t i = 0; i < A_.size(); ++i) {
            for (auto& [j, a] : A_[i]) sx.a(i, j) = a;
            sx.rhs(i) = b_[i];
        }
        auto r1 = sx.phase1();
        if (r1 == DenseSimplex<Rational>::Result::Infeasible) {
            s.status = LPStatus::Infeasible;
            return s;
        }
        if (r1 != DenseSimplex<Rational>::Result::Optimal) return s;
        AffineForm obj = substitute_eliminated(objective, pre_.elim);
        if (!minimize) obj *= Rational(-1);
        std::vector<Rational> c(ncols_, Rational(0));
        for (auto& [v, a] : obj.terms) {
            auto it = col_of_.find(v);
            if (it == col_of_.end()) {
                if (p_.nonneg[static_cast<std::size_t>(v)] && a > 0) continue;
                s.status = LPStatus::Unbounded;
                return s;
            }
            c[it->second.first] += a;
            if (it->second.second != SIZE_MAX) c[it->second.second] -= a;
        }
        auto r2 = sx.phase2(c);
        if (r2 == DenseSimplex<Rational>::Result::Unbounded) {
            s.status = LPStatus::Unbounded;
            return s;
        }
        if (r2 != DenseSimplex<Rational>::Result::Optimal) return s;
        return finish(sx.primal(), objective, true);
    }
};

inline LPSolution solve(const LPProblem& p) {
    LPSession session(p);
    return session.solve(p.objective, p.minimize);
}

// Exact rational solve; intended for small problems.
inline LPSolution solve_exact(const LPProblem& p) {
    LPSession session(p);
    return session.exact_fallback(p.objective, p.minimize);
}

// ---------------------------------------------------------------------------

inline std::string lp_number(const Rational& r) {
    if (is_integer(r)) return r.get_str();
    std::ostringstream os;
    os.precision(17);
    os << r.get_d();
    return os.str();
}

inline std::string export_lp(const LPProblem& p) {
    std::ostringstream os;
    auto name = [&](int v) { return p.names[static_cast<std::size_t>(v)]; };
    auto linear = [&](const AffineForm& f) {
        std::string s;
        for (auto& [v, a] : f.terms) {
            if (s.empty()) s += a < 0 ? "- " : "";
            else s += a < 0 ? " - " : " + ";
            Rational m = abs(a);
            if (m != 1) s += lp_number(m) + " ";
            s += name(v);
        }
        if (s.empty()) s = "0";
        return s;
    };
    os << "\\ linear program\n";
    if (p.objective.c0 != 0) os << "\\ objective constant: " << p.objective.c0.get_str() << "\n";
    os << (p.minimize ? "Minimize\n" : "Maximize\n");
    os << " obj: " << linear(p.objective) << "\n";
    os << "Subject To\n";
    std::size_t idx = 0;
    for (auto& c : p.cons) {
        ++idx;
        const char* op = c.rel == Rel::EQ ? "=" : (c.rel == Rel::GE ? ">=" : "<=");
        if (c.f.terms.empty()) {
            bool holds = c.rel == Rel::EQ ? c.f.c0 == 0 : (c.rel == Rel::GE ? c.f.c0 >= 0 : c.f.c0 <= 0);
            if (!holds && p.num_vars() > 0)
                os << " c" << idx << ": 0 " << name(0) << " " << op << " " << lp_number(-c.f.c0) << "\n";
            continue;
        }
        os << " c" << idx << ": " << linear(c.f) << " " << op << " " << lp_number(-c.f.c0) << "\n";
    }
    os << "Bounds\n";
    for (std::size_t v = 0; v < p.num_vars(); ++v) {
        if (p.nonneg[v])
            os << " " << p.names[v] << " >= 0\n";
        else
            os << " " << p.names[v] << " free\n";
    }
    os << "End\n";
    return os.str();
}

}  // namespace cma
