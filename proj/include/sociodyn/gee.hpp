#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sociodyn/stats.hpp"
#include "sociodyn/transitions.hpp"

namespace sociodyn {

enum class CorrelationKind { Independence, Exchangeable, Unstructured };

inline const char* to_string(CorrelationKind k) {
  switch (k) {
    case CorrelationKind::Independence: return "independence";
    case CorrelationKind::Exchangeable: return "exchangeable";
    default: return "unstructured";
  }
}

inline std::optional<CorrelationKind> correlation_from_string(std::string_view s) {
  if (s == "independence") return CorrelationKind::Independence;
  if (s == "exchangeable") return CorrelationKind::Exchangeable;
  if (s == "unstructured") return CorrelationKind::Unstructured;
  return std::nullopt;
}

// Correlation between two distinct within-cluster observations, indexed by
// their slot ids. Cluster matrices R_i always carry a unit diagonal; the
// pair table's diagonal entries describe distinct same-slot observations.
struct WorkingCorrelation {
  CorrelationKind kind = CorrelationKind::Independence;
  Eigen::MatrixXd pair_corr;  // slot-pair table (Unstructured)
  double exchangeable_r = 0;
  std::vector<std::string> flags;  // under-observed slot pairs set to zero
};

struct GeeOptions {
  CorrelationKind kind = CorrelationKind::Unstructured;
  double tol = 1e-8;
  int max_iter = 100;
  double alpha = 0.05;  // significance threshold for elimination
};

struct TermEstimate {
  std::string term;
  double coef = 0;
  double se = 0;
  double z = 0;
  double p = 1;
};

struct ModelFit {
  std::string state;
  Level from = Level::N;
  Level to = Level::N;
  std::vector<TermEstimate> terms;
  Eigen::MatrixXd robust_cov;
  double quasi_likelihood = 0;
  double qic = 0;
  double qicc = 0;
  bool qicc_defined = true;
  int n_rows = 0;
  int n_clusters = 0;
  bool converged = false;
  int iterations = 0;
  WorkingCorrelation correlation;

  const TermEstimate* find(std::string_view name) const {
    for (const auto& t : terms)
      if (t.term == name) return &t;
    return nullptr;
  }
  std::optional<double> coef(std::string_view name) const {
    const TermEstimate* t = find(name);
    if (!t) return std::nullopt;
    return t->coef;
  }
};

// ---------------------------------------------------------------------------
// Working-correlation estimation from Pearson residuals
// ---------------------------------------------------------------------------

namespace gee_detail {

struct Clustered {
  const DesignMatrix& d;
  Eigen::VectorXd resid;  // Pearson residuals at the current fit
};

inline double estimate_exchangeable(const Clustered& c, int p) {
  double cross = 0;
  long pairs = 0;
  double ssq = c.resid.squaredNorm();
  long n = c.resid.size();
  double phi = ssq / std::max<double>(1, static_cast<double>(n - p));
  int max_ni = 1;
  for (int k = 0; k < c.d.n_clusters(); ++k) {
    int lo = c.d.cluster_offsets[k], hi = c.d.cluster_offsets[k + 1];
    max_ni = std::max(max_ni, hi - lo);
    for (int a = lo; a < hi; ++a)
      for (int b = a + 1; b < hi; ++b) {
        cross += c.resid(a) * c.resid(b);
        ++pairs;
      }
  }
  if (pairs == 0 || phi <= 0) return 0;
  double r = cross / (phi * static_cast<double>(pairs));
  double lower = max_ni > 1 ? -1.0 / (max_ni - 1) + 1e-3 : -0.99;
  return std::clamp(r, std::max(-0.99, lower), 0.99);
}

// Pairwise moment estimates per slot pair, cosine-normalized over the pairs
// actually observed; pairs seen in fewer than two clusters are zeroed.
inline void estimate_unstructured(const Clustered& c, WorkingCorrelation& w) {
  int m = c.d.slot_domain;
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd sa = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXi nclusters = Eigen::MatrixXi::Zero(m, m);
  for (int k = 0; k < c.d.n_clusters(); ++k) {
    int lo = c.d.cluster_offsets[k], hi = c.d.cluster_offsets[k + 1];
    std::set<std::pair<int, int>> seen;
    for (int a = lo; a < hi; ++a) {
      for (int b = a + 1; b < hi; ++b) {
        int s = c.d.slot_of_row[a], t = c.d.slot_of_row[b];
        if (s > t) std::swap(s, t);
        double ea = c.resid(a), eb = c.resid(b);
        cross(s, t) += ea * eb;
        sa(s, t) += ea * ea;
        sb(s, t) += eb * eb;
        seen.insert({s, t});
      }
    }
    for (auto [s, t] : seen) nclusters(s, t)++;
  }
  w.pair_corr = Eigen::MatrixXd::Zero(m, m);
  w.flags.clear();
  for (int s = 0; s < m; ++s) {
    for (int t = s; t < m; ++t) {
      if (nclusters(s, t) == 0) continue;  // pair never observed: leave at zero
      if (nclusters(s, t) < 2) {
        w.flags.push_back("slot pair (" + std::to_string(s) + "," + std::to_string(t) +
                          ") observed in one cluster, set to 0");
        continue;
      }
      double denom = std::sqrt(sa(s, t) * sb(s, t));
      if (denom <= 0) continue;
      double r = std::clamp(cross(s, t) / denom, -0.99, 0.99);
      w.pair_corr(s, t) = r;
      w.pair_corr(t, s) = r;
    }
  }
}

inline Eigen::MatrixXd cluster_correlation(const DesignMatrix& d, const WorkingCorrelation& w,
                                           int lo, int hi) {
  int ni = hi - lo;
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(ni, ni);
  if (w.kind == CorrelationKind::Exchangeable) {
    for (int a = 0; a < ni; ++a)
      for (int b = 0; b < ni; ++b)
        if (a != b) R(a, b) = w.exchangeable_r;
  } else if (w.kind == CorrelationKind::Unstructured && w.pair_corr.size() > 0) {
    for (int a = 0; a < ni; ++a)
      for (int b = 0; b < ni; ++b)
        if (a != b) R(a, b) = w.pair_corr(d.slot_of_row[lo + a], d.slot_of_row[lo + b]);
  }
  return R;
}

// Moment estimates can leave a patterned R_i indefinite; shrink toward the
// identity until it factorizes.
inline Eigen::LLT<Eigen::MatrixXd> safe_llt(Eigen::MatrixXd R, std::vector<std::string>* flags) {
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  double lambda = 0.05;
  while (llt.info() != Eigen::Success && lambda < 8) {
    Eigen::MatrixXd shrunk =
        (R + lambda * Eigen::MatrixXd::Identity(R.rows(), R.cols())) / (1 + lambda);
    llt.compute(shrunk);
    if (llt.info() == Eigen::Success && flags)
      flags->push_back("working correlation shrunk by " + fmt_num(lambda, 3) +
                       " to restore positive definiteness");
    lambda *= 2;
  }
  if (llt.info() != Eigen::Success)
    llt.compute(Eigen::MatrixXd::Identity(R.rows(), R.cols()));
  return llt;
}

}  // namespace gee_detail

// Estimate the unstructured slot-pair table from residuals. Exposed for
// diagnostics and tests; fit_gee_logistic calls it internally per iteration.
inline WorkingCorrelation estimate_unstructured_correlation(const DesignMatrix& d,
                                                            const Eigen::VectorXd& pearson) {
  WorkingCorrelation w;
  w.kind = CorrelationKind::Unstructured;
  gee_detail::Clustered c{d, pearson};
  gee_detail::estimate_unstructured(c, w);
  return w;
}

// ---------------------------------------------------------------------------
// GEE fit for the binary logit marginal model
// ---------------------------------------------------------------------------

inline ModelFit fit_gee_logistic(const DesignMatrix& d, const std::vector<int>& columns,
                                 const GeeOptions& opts = {}) {
  const int n = d.n_rows();
  const int p = static_cast<int>(columns.size());
  if (d.n_clusters() < 2) throw InsufficientData("need at least 2 clusters");
  Eigen::MatrixXd X(n, p);
  for (int j = 0; j < p; ++j) X.col(j) = d.X.col(columns[j]);
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw RankDeficient("design matrix is rank deficient");
  }
  const Eigen::VectorXd& y = d.y;
  double ymean = y.mean();
  if (ymean <= 0.0 || ymean >= 1.0)
    throw CompleteSeparation("response is constant");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < p; ++j)
    if (d.terms[columns[j]] == "Intercept") beta(j) = stats::logit(ymean);

  auto quasi_lik = [&](const Eigen::VectorXd& b) {
    double q = 0;
    Eigen::VectorXd eta = X * b;
    for (int i = 0; i < n; ++i) {
      double mu = stats::expit(eta(i));
      mu = std::clamp(mu, 1e-12, 1 - 1e-12);
      q += y(i) * std::log(mu) + (1 - y(i)) * std::log(1 - mu);
    }
    return q;
  };

  WorkingCorrelation corr;
  corr.kind = opts.kind;
  ModelFit fit;
  fit.state = d.state;
  fit.from = d.from;
  fit.to = d.to;
  fit.n_rows = n;
  fit.n_clusters = d.n_clusters();

  Eigen::VectorXd eta(n), mu(n), v(n);
  double ql = quasi_lik(beta);
  bool converged = false;
  int iter = 0;
  std::vector<std::string> shrink_flags;

  for (iter = 1; iter <= opts.max_iter; ++iter) {
    eta = X * beta;
    if (eta.cwiseAbs().maxCoeff() > 100)
      throw CompleteSeparation("coefficients diverging (|eta| > 100)");
    for (int i = 0; i < n; ++i) {
      mu(i) = stats::expit(eta(i));
      v(i) = std::max(mu(i) * (1 - mu(i)), 1e-10);
    }
    if (opts.kind != CorrelationKind::Independence && iter > 1) {
      Eigen::VectorXd pearson = (y - mu).array() / v.array().sqrt();
      gee_detail::Clustered cl{d, pearson};
      if (opts.kind == CorrelationKind::Exchangeable)
        corr.exchangeable_r = gee_detail::estimate_exchangeable(cl, p);
      else
        gee_detail::estimate_unstructured(cl, corr);
    }

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd U = Eigen::VectorXd::Zero(p);
    for (int k = 0; k < d.n_clusters(); ++k) {
      int lo = d.cluster_offsets[k], hi = d.cluster_offsets[k + 1], ni = hi - lo;
      Eigen::VectorXd vs = v.segment(lo, ni).array().sqrt();
      Eigen::MatrixXd Xs = vs.asDiagonal() * X.middleRows(lo, ni);       // A^1/2 X
      Eigen::VectorXd rs = (y - mu).segment(lo, ni).array() / vs.array();  // A^-1/2 S
      if (opts.kind == CorrelationKind::Independence || ni == 1) {
        B.noalias() += Xs.transpose() * Xs;
        U.noalias() += Xs.transpose() * rs;
      } else {
        Eigen::MatrixXd R = gee_detail::cluster_correlation(d, corr, lo, hi);
        auto llt = gee_detail::safe_llt(std::move(R), &shrink_flags);
        Eigen::MatrixXd RinvX = llt.solve(Xs);
        B.noalias() += Xs.transpose() * RinvX;
        U.noalias() += RinvX.transpose() * rs;
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> solver(B);
    if (solver.info() != Eigen::Success)
      throw RankDeficient("estimating-equation system is singular");
    Eigen::VectorXd delta = solver.solve(U);

    double step = 1.0;
    Eigen::VectorXd cand = beta + delta;
    double ql_new = quasi_lik(cand);
    int halvings = 0;
    while (ql_new < ql - 1e-10 && halvings < 10) {
      step /= 2;
      cand = beta + step * delta;
      ql_new = quasi_lik(cand);
      ++halvings;
    }
    double max_change = (cand - beta).cwiseAbs().maxCoeff();
    beta = cand;
    ql = ql_new;
    if (max_change < opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    if ((X * beta).cwiseAbs().maxCoeff() > 30)
      throw CompleteSeparation("coefficients diverging at the iteration cap");
    throw NonConvergence("no convergence in " + std::to_string(opts.max_iter) + " iterations");
  }

  // Final state and covariances.
  eta = X * beta;
  for (int i = 0; i < n; ++i) {
    mu(i) = stats::expit(eta(i));
    v(i) = std::max(mu(i) * (1 - mu(i)), 1e-10);
  }
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < d.n_clusters(); ++k) {
    int lo = d.cluster_offsets[k], hi = d.cluster_offsets[k + 1], ni = hi - lo;
    Eigen::VectorXd vs = v.segment(lo, ni).array().sqrt();
    Eigen::MatrixXd Xs = vs.asDiagonal() * X.middleRows(lo, ni);
    Eigen::VectorXd rs = (y - mu).segment(lo, ni).array() / vs.array();
    Eigen::VectorXd g(p);
    if (opts.kind == CorrelationKind::Independence || ni == 1) {
      B.noalias() += Xs.transpose() * Xs;
      g.noalias() = Xs.transpose() * rs;
    } else {
      Eigen::MatrixXd R = gee_detail::cluster_correlation(d, corr, lo, hi);
      auto llt = gee_detail::safe_llt(std::move(R), nullptr);
      Eigen::MatrixXd RinvX = llt.solve(Xs);
      B.noalias() += Xs.transpose() * RinvX;
      g.noalias() = RinvX.transpose() * rs;
    }
    M.noalias() += g * g.transpose();
  }
  Eigen::LDLT<Eigen::MatrixXd> bread(B);
  Eigen::MatrixXd Binv = bread.solve(Eigen::MatrixXd::Identity(p, p));
  fit.robust_cov = Binv * M * Binv;
  fit.quasi_likelihood = ql;
  fit.converged = true;
  fit.iterations = iter;
  corr.flags.insert(corr.flags.end(), shrink_flags.begin(), shrink_flags.end());
  fit.correlation = corr;

  // Model-based information under independence, for the QIC trace term.
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < n; ++i) omega.noalias() += v(i) * X.row(i).transpose() * X.row(i);
  double trace_term = (omega * fit.robust_cov).trace();
  fit.qic = -2 * ql + 2 * trace_term;
  if (n > p + 1) {
    fit.qicc = fit.qic + 2.0 * p * (p + 1) / static_cast<double>(n - p - 1);
    fit.qicc_defined = true;
  } else {
    fit.qicc = std::numeric_limits<double>::quiet_NaN();
    fit.qicc_defined = false;
  }

  for (int j = 0; j < p; ++j) {
    TermEstimate t;
    t.term = d.terms[columns[j]];
    t.coef = beta(j);
    t.se = std::sqrt(std::max(0.0, fit.robust_cov(j, j)));
    t.z = t.se > 0 ? t.coef / t.se : 0;
    t.p = t.se > 0 ? 2 * (1 - stats::normal_cdf(std::fabs(t.z))) : 1.0;
    fit.terms.push_back(std::move(t));
  }
  return fit;
}

// Corrected quasi-likelihood criterion of an existing fit (lower is better).
inline double qicc(const ModelFit& fit) {
  if (!fit.qicc_defined) throw Error("QICC undefined: too few rows for the term count");
  return fit.qicc;
}

// ---------------------------------------------------------------------------
// Backward elimination with null-model comparison
// ---------------------------------------------------------------------------

struct DropStep {
  std::string term;
  double qicc_before = 0;
  double qicc_after = 0;
};

struct SelectionTrace {
  std::vector<DropStep> steps;
  std::vector<std::string> final_terms;
  double null_qicc = 0;
  bool chose_null = false;
  std::vector<std::string> notes;
};

struct SelectedModel {
  ModelFit fit;        // the chosen model (sub-model or null)
  SelectionTrace trace;
};

namespace gee_detail {

inline int interaction_order(const std::string& term) {
  return static_cast<int>(std::count(term.begin(), term.end(), '*'));
}

}  // namespace gee_detail

inline SelectedModel backward_eliminate(const DesignMatrix& d, const GeeOptions& opts = {}) {
  SelectedModel out;
  std::vector<int> intercept_only;
  for (size_t j = 0; j < d.terms.size(); ++j)
    if (d.terms[j] == "Intercept") intercept_only.push_back(static_cast<int>(j));
  ModelFit null_fit = fit_gee_logistic(d, intercept_only, opts);
  out.trace.null_qicc = null_fit.qicc;

  std::vector<int> cols(d.terms.size());
  for (size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);

  std::optional<ModelFit> current;
  try {
    current = fit_gee_logistic(d, cols, opts);
  } catch (const Error& e) {
    out.trace.notes.push_back(std::string("full model failed: ") + e.what());
  }

  auto defined_qicc = [](const ModelFit& f) {
    return f.qicc_defined ? f.qicc : std::numeric_limits<double>::infinity();
  };

  while (current) {
    // Insignificant terms, worst first; interactions break ties before
    // main effects, then names.
    std::vector<const TermEstimate*> candidates;
    for (const auto& t : current->terms)
      if (t.term != "Intercept" && t.p > opts.alpha) candidates.push_back(&t);
    if (candidates.empty()) break;
    std::sort(candidates.begin(), candidates.end(),
              [](const TermEstimate* a, const TermEstimate* b) {
                int oa = gee_detail::interaction_order(a->term);
                int ob = gee_detail::interaction_order(b->term);
                return std::tie(a->p, oa, b->term) > std::tie(b->p, ob, a->term);
              });
    bool improved = false;
    for (const TermEstimate* cand : candidates) {
      std::vector<int> reduced;
      for (int j : cols)
        if (d.terms[j] != cand->term) reduced.push_back(j);
      std::optional<ModelFit> refit;
      try {
        refit = fit_gee_logistic(d, reduced, opts);
      } catch (const Error& e) {
        out.trace.notes.push_back("dropping " + cand->term + " failed: " + e.what());
        continue;
      }
      if (defined_qicc(*refit) < defined_qicc(*current)) {
        out.trace.steps.push_back({cand->term, defined_qicc(*current), defined_qicc(*refit)});
        cols = std::move(reduced);
        current = std::move(refit);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  if (current) {
    for (const auto& t : current->terms) out.trace.final_terms.push_back(t.term);
    if (defined_qicc(*current) <= null_fit.qicc) {
      out.fit = std::move(*current);
      out.trace.chose_null = false;
      return out;
    }
  }
  out.trace.chose_null = true;
  if (out.trace.final_terms.empty()) out.trace.final_terms.push_back("Intercept");
  out.fit = std::move(null_fit);
  return out;
}

}  // namespace sociodyn
