#include "meanfp/means.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace meanfp {

namespace {

constexpr double kWeightTol = 1e-12;

// Componentwise Kahan accumulation with preallocated scratch.
struct KahanVec {
  VectorXd sum, comp, y, t;

  explicit KahanVec(int d)
      : sum(VectorXd::Zero(d)), comp(VectorXd::Zero(d)), y(d), t(d) {}

  void reset() {
    sum.setZero();
    comp.setZero();
  }

  void add_scaled(const VectorXd& v, double w) {
    y.array() = v.array() * w - comp.array();
    t.array() = sum.array() + y.array();
    comp.array() = (t.array() - sum.array()) - y.array();
    sum.swap(t);
  }

  void add(const VectorXd& v) {
    y.array() = v.array() - comp.array();
    t.array() = sum.array() + y.array();
    comp.array() = (t.array() - sum.array()) - y.array();
    sum.swap(t);
  }
};

bool value_equal(const VectorXd& a, const VectorXd& b) {
  return (a.array() == b.array()).all();
}

int last_nonzero_axis(const MultiIndex& s) {
  for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i)
    if (s[static_cast<size_t>(i)] > 0) return i;
  return -1;
}

long long checked_pow(long long base, int exp, bool& overflow) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (1LL << 62) / base) {
      overflow = true;
      return 0;
    }
    r *= base;
  }
  overflow = false;
  return r;
}

}  // namespace

FiniteMean::FiniteMean(int k, std::vector<Entry> support)
    : k_(k), support_(std::move(support)) {
  if (k_ < 1) throw std::invalid_argument("FiniteMean: k must be >= 1");
  if (support_.empty())
    throw std::invalid_argument("FiniteMean: empty support");
  for (const auto& e : support_) {
    if (static_cast<int>(e.s.size()) != k_)
      throw std::invalid_argument("FiniteMean: support arity mismatch");
    for (int v : e.s)
      if (v < 0)
        throw std::invalid_argument("FiniteMean: negative support index");
    if (!(e.w >= 0.0))
      throw std::invalid_argument("FiniteMean: negative weight");
  }
  std::sort(support_.begin(), support_.end(),
            [](const Entry& a, const Entry& b) { return a.s < b.s; });
  for (size_t i = 1; i < support_.size(); ++i)
    if (support_[i].s == support_[i - 1].s)
      throw std::invalid_argument("FiniteMean: duplicate support entry");
  double total = 0.0, comp = 0.0;
  for (const auto& e : support_) {
    const double y = e.w - comp;
    const double t = total + y;
    comp = (t - total) - y;
    total = t;
  }
  if (std::abs(total - 1.0) > kWeightTol)
    throw std::invalid_argument("FiniteMean: weights sum to " +
                                std::to_string(total) + ", expected 1");
}

FiniteMean cesaro_mean(int n, int k) {
  if (n < 1 || k < 1)
    throw std::invalid_argument("cesaro_mean: needs n >= 1 and k >= 1");
  bool overflow = false;
  const long long total = checked_pow(n, k, overflow);
  if (overflow || total > (1LL << 26))
    throw std::invalid_argument("cesaro_mean: box of n^k points is too large");
  const double w = 1.0 / static_cast<double>(total);
  std::vector<FiniteMean::Entry> entries;
  entries.reserve(static_cast<size_t>(total));
  MultiIndex s = zero_index(k);
  for (long long idx = 0; idx < total; ++idx) {
    entries.push_back({s, w});
    for (int axis = k - 1; axis >= 0; --axis) {
      if (++s[static_cast<size_t>(axis)] < n) break;
      s[static_cast<size_t>(axis)] = 0;
    }
  }
  FiniteMean mu(k, std::move(entries));
  mu.box_n_ = n;
  return mu;
}

FiniteMean point_mass(const MultiIndex& s) {
  std::vector<FiniteMean::Entry> entries{{s, 1.0}};
  FiniteMean mu(static_cast<int>(s.size()), std::move(entries));
  if (index_total(s) == 0) mu.box_n_ = 1;
  return mu;
}

double regularity_defect(const FiniteMean& mu, const MultiIndex& shift) {
  if (static_cast<int>(shift.size()) != mu.k())
    throw std::invalid_argument("regularity_defect: shift arity mismatch");
  for (int v : shift)
    if (v < 0)
      throw std::invalid_argument("regularity_defect: negative shift entry");

  if (mu.box_n()) {
    // l_s^* mu is uniform on the shifted box; the overlap with the original
    // box factors, so the escaped mass counts exactly.
    const long long n = *mu.box_n();
    bool overflow = false;
    const long long total = checked_pow(n, mu.k(), overflow);
    if (!overflow) {
      long long overlap = 1;
      for (int i = 0; i < mu.k(); ++i) {
        const long long keep = std::max(0LL, n - shift[static_cast<size_t>(i)]);
        overlap *= keep;
      }
      long long num = 2 * (total - overlap);
      long long den = total;
      const long long g = std::gcd(num, den);
      if (g > 0) {
        num /= g;
        den /= g;
      }
      return static_cast<double>(num) / static_cast<double>(den);
    }
  }

  std::map<MultiIndex, double> diff;
  for (const auto& e : mu.support()) {
    diff[add_index(e.s, shift)] += e.w;
    diff[e.s] -= e.w;
  }
  double tv = 0.0, comp = 0.0;
  for (const auto& [s, w] : diff) {
    const double y = std::abs(w) - comp;
    const double t = tv + y;
    comp = (t - tv) - y;
    tv = t;
  }
  return tv;
}

OrbitTable::OrbitTable(int k, int n, MatrixXd values)
    : k_(k), n_(n), values_(std::move(values)) {}

long OrbitTable::index_of(const MultiIndex& s) const {
  if (static_cast<int>(s.size()) != k_)
    throw std::invalid_argument("OrbitTable: index arity mismatch");
  long idx = 0;
  for (int i = 0; i < k_; ++i) {
    const int v = s[static_cast<size_t>(i)];
    if (v < 0 || v >= n_)
      throw std::out_of_range("OrbitTable: index outside the box");
    idx = idx * n_ + v;
  }
  return idx;
}

Eigen::Ref<const VectorXd> OrbitTable::entry(const MultiIndex& s) const {
  return values_.col(index_of(s));
}

OrbitTable mean_orbit_cache(const Representation& rep, int n,
                            const VectorXd& x) {
  if (n < 1) throw std::invalid_argument("mean_orbit_cache: n must be >= 1");
  rep.check_in_domain(x);
  const int k = rep.k();
  bool overflow = false;
  const long long total = checked_pow(n, k, overflow);
  if (overflow || total > (1LL << 26))
    throw std::invalid_argument("mean_orbit_cache: orbit table too large");

  MatrixXd values(rep.dim(), total);
  values.col(0) = x;
  // Strides of the lexicographic layout: axis k-1 is fastest.
  std::vector<long long> stride(static_cast<size_t>(k), 1);
  for (int i = k - 2; i >= 0; --i)
    stride[static_cast<size_t>(i)] = stride[static_cast<size_t>(i + 1)] * n;

  MultiIndex s = zero_index(k);
  for (long long idx = 1; idx < total; ++idx) {
    for (int axis = k - 1; axis >= 0; --axis) {
      if (++s[static_cast<size_t>(axis)] < n) break;
      s[static_cast<size_t>(axis)] = 0;
    }
    const int axis = last_nonzero_axis(s);
    const long long parent = idx - stride[static_cast<size_t>(axis)];
    rep.generator(axis).apply_into(values.col(parent), values.col(idx));
  }
  return OrbitTable(k, n, std::move(values));
}

VectorXd apply_mean(const Representation& rep, const FiniteMean& mu,
                    const VectorXd& x) {
  if (mu.k() != rep.k())
    throw std::invalid_argument("apply_mean: mean arity does not match k");
  rep.check_in_domain(x);
  const int d = rep.dim();

  std::map<MultiIndex, VectorXd> memo;
  memo.emplace(zero_index(rep.k()), x);
  std::vector<MultiIndex> pending;
  auto orbit_at = [&](const MultiIndex& s) -> const VectorXd& {
    pending.clear();
    MultiIndex cur = s;
    while (memo.find(cur) == memo.end()) {
      pending.push_back(cur);
      const int axis = last_nonzero_axis(cur);
      cur[static_cast<size_t>(axis)] -= 1;
    }
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
      const int axis = last_nonzero_axis(*it);
      MultiIndex prev = *it;
      prev[static_cast<size_t>(axis)] -= 1;
      VectorXd v(d);
      rep.generator(axis).apply_into(memo.at(prev), v);
      memo.emplace(*it, std::move(v));
    }
    return memo.at(s);
  };

  KahanVec acc(d);
  for (const auto& e : mu.support()) acc.add_scaled(orbit_at(e.s), e.w);
  return acc.sum;
}

BoxMeanApplier::BoxMeanApplier(const Representation& rep, int n)
    : rep_(&rep), n_(n) {
  if (n < 1) throw std::invalid_argument("BoxMeanApplier: n must be >= 1");
  levels_.resize(static_cast<size_t>(rep.k()));
  for (auto& L : levels_) {
    const int d = rep.dim();
    L.cur.resize(d);
    L.nxt.resize(d);
    L.sub.resize(d);
    L.acc.resize(d);
    L.comp.resize(d);
    L.kah_y.resize(d);
    L.kah_t.resize(d);
  }
}

void BoxMeanApplier::recurse(int axis, const VectorXd& y, VectorXd& out) {
  if (axis == rep_->k()) {
    out = y;
    return;
  }
  Level& L = levels_[static_cast<size_t>(axis)];
  L.acc.setZero();
  L.comp.setZero();
  L.cur = y;
  auto kahan_add = [&](const VectorXd& v, double w) {
    L.kah_y.array() = v.array() * w - L.comp.array();
    L.kah_t.array() = L.acc.array() + L.kah_y.array();
    L.comp.array() = (L.kah_t.array() - L.acc.array()) - L.kah_y.array();
    L.acc.swap(L.kah_t);
  };
  for (int i = 0; i < n_; ++i) {
    recurse(axis + 1, L.cur, L.sub);
    kahan_add(L.sub, 1.0);
    if (i + 1 < n_) {
      rep_->generator(axis).apply_into(L.cur, L.nxt);
      if (value_equal(L.nxt, L.cur)) {
        // The ray reached a fixed point of this generator; the remaining
        // n-1-i entries repeat the same sub-mean.
        if (n_ - 1 - i > 0) kahan_add(L.sub, static_cast<double>(n_ - 1 - i));
        break;
      }
      L.cur.swap(L.nxt);
    }
  }
  out = L.acc / static_cast<double>(n_);
}

void BoxMeanApplier::apply(const VectorXd& x, VectorXd& out) {
  rep_->check_in_domain(x);
  recurse(0, x, out);
}

VectorXd BoxMeanApplier::operator()(const VectorXd& x) {
  VectorXd out(rep_->dim());
  apply(x, out);
  return out;
}

MeanApplier::MeanApplier(const Representation& rep, const FiniteMean& mu)
    : rep_(&rep), mu_(&mu) {
  if (mu.k() != rep.k())
    throw std::invalid_argument("MeanApplier: mean arity does not match k");
  if (mu.box_n()) box_.emplace(rep, *mu.box_n());
}

void MeanApplier::apply(const VectorXd& x, VectorXd& out) {
  if (box_) {
    box_->apply(x, out);
  } else {
    out = apply_mean(*rep_, *mu_, x);
  }
}

VectorXd MeanApplier::operator()(const VectorXd& x) {
  VectorXd out(rep_->dim());
  apply(x, out);
  return out;
}

VectorXd apply_mean_fast(const Representation& rep, const FiniteMean& mu,
                         const VectorXd& x) {
  MeanApplier applier(rep, mu);
  return applier(x);
}

}  // namespace meanfp
