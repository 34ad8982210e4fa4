#include "msego/gp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msego/dfo.hpp"
#include "msego/errors.hpp"
#include "msego/rng.hpp"

namespace msego {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSigma2Floor = 1e-300;

Eigen::VectorXd effective_theta(const KernelConfig& kernel, const Eigen::VectorXd& theta, Eigen::Index dim) {
  if (kernel.variant == KernelVariant::FullSe) {
    if (theta.size() != dim) throw std::domain_error("gp: theta length must equal the relaxed dimension");
    return theta;
  }
  const Eigen::MatrixXd& b = kernel.loadings.coefficients;
  if (b.rows() != dim) throw std::domain_error("gp: loadings row count must equal the relaxed dimension");
  if (theta.size() != b.cols()) throw std::domain_error("gp: theta length must equal the component count");
  return b.array().square().matrix() * theta;
}

double kernel_from_effective(const RelaxedVector& a, const RelaxedVector& b, const Eigen::VectorXd& theta_eff) {
  double s = 0.0;
  for (Eigen::Index p = 0; p < a.size(); ++p) {
    const double d = a[p] - b[p];
    s += theta_eff[p] * d * d;
  }
  return std::exp(-s);
}

struct PreparedData {
  Eigen::MatrixXd inputs;  // normalized, duplicates merged
  Eigen::VectorXd outputs;  // merged raw outputs
  Eigen::VectorXd y_std;
  double y_mean = 0.0;
  double y_scale = 1.0;
  Eigen::VectorXd lo, scale;  // size 0 -> identity
  bool constant = false;
};

PreparedData prepare_data(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                          const std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& bounds) {
  if (inputs.rows() != outputs.size()) throw std::invalid_argument("fit_gp: inputs/outputs row mismatch");
  if (inputs.rows() < 2) throw std::invalid_argument("fit_gp: need at least two training points");

  PreparedData d;
  if (bounds) {
    const auto& [lo, hi] = *bounds;
    if (lo.size() != inputs.cols() || hi.size() != inputs.cols()) {
      throw std::invalid_argument("fit_gp: input bounds size mismatch");
    }
    d.lo = lo;
    d.scale = (hi - lo).cwiseMax(0.0);
    for (Eigen::Index i = 0; i < d.scale.size(); ++i) {
      if (d.scale[i] <= 0.0) d.scale[i] = 1.0;
    }
  }

  Eigen::MatrixXd norm = inputs;
  if (d.lo.size() > 0) {
    norm = (inputs.rowwise() - d.lo.transpose()).array().rowwise() / d.scale.transpose().array();
  }

  // Merge exact duplicate rows, averaging outputs, first-occurrence order.
  const Eigen::Index n = norm.rows();
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> uniques;
  std::vector<double> sums;
  std::vector<int> counts;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index found = -1;
    for (std::size_t u = 0; u < uniques.size(); ++u) {
      if (norm.row(i) == norm.row(uniques[u])) {
        found = static_cast<Eigen::Index>(u);
        break;
      }
    }
    if (found < 0) {
      uniques.push_back(i);
      sums.push_back(outputs[i]);
      counts.push_back(1);
    } else {
      sums[static_cast<std::size_t>(found)] += outputs[i];
      counts[static_cast<std::size_t>(found)] += 1;
    }
    owner[static_cast<std::size_t>(i)] = found;
  }

  const Eigen::Index m = static_cast<Eigen::Index>(uniques.size());
  d.inputs.resize(m, norm.cols());
  d.outputs.resize(m);
  for (Eigen::Index u = 0; u < m; ++u) {
    d.inputs.row(u) = norm.row(uniques[static_cast<std::size_t>(u)]);
    d.outputs[u] = sums[static_cast<std::size_t>(u)] / counts[static_cast<std::size_t>(u)];
  }

  d.y_mean = d.outputs.mean();
  const double var = (d.outputs.array() - d.y_mean).square().sum() / static_cast<double>(m);
  const double sd = std::sqrt(var);
  if (m < 2 || sd <= 1e-14 * std::max(1.0, std::abs(d.y_mean))) {
    d.constant = true;
    d.y_scale = 1.0;
    d.y_std = Eigen::VectorXd::Zero(m);
    return d;
  }
  d.y_scale = sd;
  d.y_std = (d.outputs.array() - d.y_mean) / d.y_scale;
  return d;
}

/// Upper-triangle pairwise squared differences, one row per (i<j) pair.
Eigen::MatrixXd pair_sq_diffs(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d(n * (n - 1) / 2, x.cols());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d.row(k++) = (x.row(i) - x.row(j)).array().square();
    }
  }
  return d;
}

struct LikelihoodTerms {
  double cll = kNegInf;
  double mu = 0.0;
  double sigma2 = 0.0;
  Eigen::MatrixXd chol;
  Eigen::VectorXd v;
  bool ok = false;
};

LikelihoodTerms evaluate_likelihood(const Eigen::MatrixXd& pair_d, const Eigen::VectorXd& y_std,
                                    const Eigen::VectorXd& theta_eff, double eta) {
  const Eigen::Index n = y_std.size();
  LikelihoodTerms out;

  Eigen::MatrixXd r(n, n);
  const Eigen::VectorXd expo = pair_d * theta_eff;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0 + eta;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = std::exp(-expo[k++]);
      r(i, j) = c;
      r(j, i) = c;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) return out;
  const Eigen::MatrixXd l = llt.matrixL();

  const Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(y_std);
  const Eigen::VectorXd v = l.triangularView<Eigen::Lower>().solve(Eigen::VectorXd::Ones(n));
  const double vtv = v.squaredNorm();
  if (!(vtv > 0.0)) return out;
  out.mu = v.dot(w) / vtv;
  const Eigen::VectorXd resid = w - out.mu * v;
  out.sigma2 = resid.squaredNorm() / static_cast<double>(n);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(l(i, i));
  out.cll = -static_cast<double>(n) * std::log(std::max(out.sigma2, kSigma2Floor)) - logdet;
  out.chol = l;
  out.v = v;
  out.ok = std::isfinite(out.cll);
  return out;
}

std::string double_to_hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double hex_to_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(double_to_hex(v[i]));
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = hex_to_double(a[static_cast<std::size_t>(i)].get<std::string>());
  return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(double_to_hex(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, Eigen::Index cols_hint) {
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : cols_hint;
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 0; j < nc; ++j) {
      m(i, j) = hex_to_double(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<std::string>());
    }
  }
  return m;
}

}  // namespace

double kernel_se(const RelaxedVector& a, const RelaxedVector& b, const Eigen::VectorXd& theta) {
  if (a.size() != b.size() || a.size() != theta.size()) {
    throw std::domain_error("kernel_se: dimension mismatch");
  }
  if ((theta.array() <= 0.0).any()) throw std::domain_error("kernel_se: theta must be positive");
  return kernel_from_effective(a, b, theta);
}

double kernel_kpls(const RelaxedVector& a, const RelaxedVector& b, const Eigen::VectorXd& theta,
                   const PlsLoadings& loadings) {
  if (a.size() != b.size() || a.size() != loadings.coefficients.rows()) {
    throw std::domain_error("kernel_kpls: point dimension mismatch");
  }
  if (theta.size() != loadings.coefficients.cols()) {
    throw std::domain_error("kernel_kpls: theta length must equal the component count");
  }
  if ((theta.array() <= 0.0).any()) throw std::domain_error("kernel_kpls: theta must be positive");
  const Eigen::VectorXd theta_eff = loadings.coefficients.array().square().matrix() * theta;
  return kernel_from_effective(a, b, theta_eff);
}

Eigen::VectorXd GpModel::normalize_query(const RelaxedVector& point) const {
  if (norm_lo_.size() == 0) return point;
  return (point - norm_lo_).array() / norm_scale_.array();
}

void GpModel::factorize() {
  const Eigen::MatrixXd pair_d = pair_sq_diffs(inputs_norm_);
  LikelihoodTerms t = evaluate_likelihood(pair_d, y_std_, theta_eff_, nugget_);
  if (!t.ok) throw IllConditionedError("gp: correlation matrix not positive definite at final hyperparameters");
  mu_std_ = t.mu;
  sigma2_std_ = std::max(t.sigma2, kSigma2Floor);
  chol_ = t.chol;
  v_ = t.v;
  one_R_one_ = v_.squaredNorm();
  cll_ = t.cll;
  const Eigen::VectorXd resid = y_std_.array() - mu_std_;
  alpha_ = chol_.triangularView<Eigen::Lower>().transpose().solve(
      chol_.triangularView<Eigen::Lower>().solve(resid));
}

Prediction GpModel::predict(const RelaxedVector& point) const {
  if (point.size() != inputs_norm_.cols()) throw std::domain_error("predict: point dimension mismatch");
  if (constant_) return {y_mean_, 0.0};

  const Eigen::VectorXd q = normalize_query(point);
  const Eigen::Index n = inputs_norm_.rows();
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r[i] = kernel_from_effective(q, inputs_norm_.row(i).transpose(), theta_eff_);
  }
  const double mean_std = mu_std_ + r.dot(alpha_);
  const Eigen::VectorXd t1 = chol_.triangularView<Eigen::Lower>().solve(r);
  const double one_minus = 1.0 - v_.dot(t1);
  double var_std = sigma2_std_ * (1.0 - t1.squaredNorm() + one_minus * one_minus / one_R_one_);
  var_std = std::max(var_std, 0.0);
  return {y_mean_ + y_scale_ * mean_std, y_scale_ * y_scale_ * var_std};
}

Prediction GpModel::predict(const MixedPoint& w, const MixedSpace& space) const {
  return predict(space.relax(w));
}

GpModel fit_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, KernelConfig kernel,
               const FitOptions& options) {
  PreparedData data = prepare_data(inputs, outputs, options.input_bounds);
  const Eigen::Index dim = data.inputs.cols();
  const int h = kernel.hyperparameter_count(static_cast<int>(dim));
  if (h < 1) throw std::invalid_argument("fit_gp: kernel has no hyperparameters");

  if (options.fixed_theta) {
    if (options.fixed_theta->size() != h) throw std::domain_error("fit_gp: fixed theta length mismatch");
    if ((options.fixed_theta->array() <= 0.0).any()) throw std::domain_error("fit_gp: fixed theta must be positive");
  }

  GpModel model;
  model.inputs_norm_ = data.inputs;
  model.outputs_ = data.outputs;
  model.y_std_ = data.y_std;
  model.y_mean_ = data.y_mean;
  model.y_scale_ = data.y_scale;
  model.norm_lo_ = data.lo;
  model.norm_scale_ = data.scale;
  model.kernel_ = std::move(kernel);

  if (data.constant) {
    model.constant_ = true;
    model.theta_ = options.fixed_theta ? *options.fixed_theta : Eigen::VectorXd::Ones(h);
    model.theta_eff_ = effective_theta(model.kernel_, model.theta_, dim);
    model.nugget_ = options.fixed_nugget.value_or(0.0);
    model.sigma2_std_ = 1e-30;
    model.cll_ = 0.0;
    return model;
  }

  const NuggetMode mode = options.nugget_mode.value_or(
      model.kernel_.variant == KernelVariant::FullSe ? NuggetMode::JitterFloor : NuggetMode::MleNugget);

  const Eigen::MatrixXd pair_d = pair_sq_diffs(data.inputs);

  const bool search_theta = !options.fixed_theta.has_value();
  const bool search_eta = !options.fixed_nugget.has_value() && mode == NuggetMode::MleNugget;

  // Jitter ladder applies when eta is neither fixed nor optimized.
  auto eval_at = [&](const Eigen::VectorXd& theta, double eta, bool allow_ladder) {
    const Eigen::VectorXd theta_eff = effective_theta(model.kernel_, theta, dim);
    LikelihoodTerms t = evaluate_likelihood(pair_d, data.y_std, theta_eff, eta);
    double eta_used = eta;
    if (!t.ok && allow_ladder) {
      for (double e = std::max(eta, 1e-10) * 10.0; e <= 1e-6 * 1.0000001; e *= 10.0) {
        t = evaluate_likelihood(pair_d, data.y_std, theta_eff, e);
        eta_used = e;
        if (t.ok) break;
      }
    }
    return std::pair<LikelihoodTerms, double>(std::move(t), eta_used);
  };

  Eigen::VectorXd best_theta;
  double best_eta = 0.0;
  double best_cll = kNegInf;
  bool escalated = false;

  if (!search_theta && !search_eta) {
    const Eigen::VectorXd theta = *options.fixed_theta;
    double eta = options.fixed_nugget.value_or(mode == NuggetMode::JitterFloor ? 1e-10 : 1e-8);
    const bool ladder = !options.fixed_nugget.has_value();
    auto [terms, eta_used] = eval_at(theta, eta, ladder);
    if (!terms.ok) throw IllConditionedError("fit_gp: correlation matrix not positive definite");
    best_theta = theta;
    best_eta = eta_used;
    best_cll = terms.cll;
    escalated = ladder && eta_used > 1e-10;
  } else {
    const int n_theta_dims = search_theta ? h : 0;
    const int n_dims = n_theta_dims + (search_eta ? 1 : 0);
    Eigen::VectorXd lo(n_dims), hi(n_dims);
    for (int i = 0; i < n_theta_dims; ++i) {
      lo[i] = -6.0;
      hi[i] = 2.0;
    }
    if (search_eta) {
      lo[n_dims - 1] = -12.0;
      hi[n_dims - 1] = -2.0;
    }

    auto decode = [&](const Eigen::VectorXd& xi) {
      Eigen::VectorXd theta = search_theta ? Eigen::VectorXd(h) : *options.fixed_theta;
      if (search_theta) {
        for (int i = 0; i < h; ++i) theta[i] = std::pow(10.0, xi[i]);
      }
      double eta;
      if (search_eta) {
        eta = std::pow(10.0, xi[n_dims - 1]);
      } else if (options.fixed_nugget) {
        eta = *options.fixed_nugget;
      } else {
        eta = 1e-10;  // jitter floor
      }
      return std::pair<Eigen::VectorXd, double>(std::move(theta), eta);
    };

    const bool ladder = !search_eta && !options.fixed_nugget.has_value();
    auto objective = [&](const Eigen::VectorXd& xi) {
      auto [theta, eta] = decode(xi);
      auto [terms, eta_used] = eval_at(theta, eta, ladder);
      (void)eta_used;
      return terms.ok ? -terms.cll : std::numeric_limits<double>::max();
    };

    // Start 1 at theta = 1 (and a small nugget); remaining starts centered
    // LHS in the log-space box.
    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd s0 = Eigen::VectorXd::Zero(n_dims);
    if (search_eta) s0[n_dims - 1] = -8.0;
    starts.push_back(s0);
    const int extra = std::max(options.starts, 1) - 1;
    if (extra > 0) {
      Rng rng(mix_seed(options.seed, 0x6f17));
      std::vector<int> perm(static_cast<std::size_t>(extra));
      Eigen::MatrixXd unit(extra, n_dims);
      for (int d = 0; d < n_dims; ++d) {
        for (int i = 0; i < extra; ++i) perm[static_cast<std::size_t>(i)] = i;
        rng.shuffle(perm);
        for (int i = 0; i < extra; ++i) {
          unit(i, d) = (perm[static_cast<std::size_t>(i)] + 0.5) / extra;
        }
      }
      for (int i = 0; i < extra; ++i) {
        Eigen::VectorXd s(n_dims);
        for (int d = 0; d < n_dims; ++d) s[d] = lo[d] + unit(i, d) * (hi[d] - lo[d]);
        starts.push_back(std::move(s));
      }
    }

    const int per_start = options.evals_per_start > 0 ? options.evals_per_start : 200 * n_dims;
    Eigen::VectorXd best_xi;
    double best_neg = std::numeric_limits<double>::max();
    for (const Eigen::VectorXd& s : starts) {
      dfo::TrustRegionOptions tro;
      tro.max_evaluations = per_start;
      const dfo::TrustRegionResult r = dfo::minimize_trust_region(objective, s, lo, hi, tro);
      if (r.value < best_neg) {
        best_neg = r.value;
        best_xi = r.x;
      }
    }
    if (best_neg == std::numeric_limits<double>::max()) {
      throw IllConditionedError("fit_gp: no positive definite correlation matrix found in the search");
    }

    auto [theta, eta] = decode(best_xi);
    auto [terms, eta_used] = eval_at(theta, eta, ladder);
    if (!terms.ok && search_eta) {
      // Escalate the fitted nugget within its box as a last resort.
      for (double e = eta * 10.0; e <= 1e-2 * 1.0000001; e *= 10.0) {
        terms = evaluate_likelihood(pair_d, data.y_std, effective_theta(model.kernel_, theta, dim), e);
        eta_used = e;
        if (terms.ok) break;
      }
      escalated = true;
    }
    if (!terms.ok) throw IllConditionedError("fit_gp: correlation matrix not positive definite after escalation");
    best_theta = std::move(theta);
    best_eta = eta_used;
    best_cll = terms.cll;
    escalated = escalated || (ladder && eta_used > 1e-10);
  }

  model.theta_ = best_theta;
  model.theta_eff_ = effective_theta(model.kernel_, model.theta_, dim);
  model.nugget_ = best_eta;
  model.jitter_escalated_ = escalated;
  model.factorize();
  (void)best_cll;
  return model;
}

double concentrated_log_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                                   const KernelConfig& kernel, const Eigen::VectorXd& theta,
                                   double nugget,
                                   const std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>&
                                       input_bounds) {
  PreparedData data = prepare_data(inputs, outputs, input_bounds);
  if (data.constant) return 0.0;
  const Eigen::VectorXd theta_eff = effective_theta(kernel, theta, data.inputs.cols());
  const LikelihoodTerms t = evaluate_likelihood(pair_sq_diffs(data.inputs), data.y_std, theta_eff, nugget);
  return t.ok ? t.cll : kNegInf;
}

nlohmann::json GpModel::to_json() const {
  nlohmann::json j;
  j["kernel"] = kernel_.variant == KernelVariant::FullSe ? "full_se" : "kpls_se";
  if (kernel_.variant == KernelVariant::KplsSe) {
    j["loadings"] = {{"coefficients", matrix_to_json(kernel_.loadings.coefficients)},
                     {"input_means", vector_to_json(kernel_.loadings.input_means)}};
  }
  j["inputs"] = matrix_to_json(inputs_norm_);
  j["outputs"] = vector_to_json(outputs_);
  j["theta"] = vector_to_json(theta_);
  j["nugget"] = double_to_hex(nugget_);
  j["y_mean"] = double_to_hex(y_mean_);
  j["y_scale"] = double_to_hex(y_scale_);
  j["mu_std"] = double_to_hex(mu_std_);
  j["sigma2_std"] = double_to_hex(sigma2_std_);
  j["cll"] = double_to_hex(cll_);
  j["norm_lo"] = vector_to_json(norm_lo_);
  j["norm_scale"] = vector_to_json(norm_scale_);
  j["constant"] = constant_;
  j["jitter_escalated"] = jitter_escalated_;
  return j;
}

GpModel GpModel::from_json(const nlohmann::json& j) {
  GpModel m;
  const std::string variant = j.at("kernel").get<std::string>();
  if (variant == "kpls_se") {
    PlsLoadings b;
    b.coefficients = matrix_from_json(j.at("loadings").at("coefficients"), 0);
    b.input_means = vector_from_json(j.at("loadings").at("input_means"));
    m.kernel_ = KernelConfig::kpls(std::move(b));
  } else {
    m.kernel_ = KernelConfig::full_se();
  }
  m.inputs_norm_ = matrix_from_json(j.at("inputs"), 0);
  m.outputs_ = vector_from_json(j.at("outputs"));
  m.theta_ = vector_from_json(j.at("theta"));
  m.nugget_ = hex_to_double(j.at("nugget").get<std::string>());
  m.y_mean_ = hex_to_double(j.at("y_mean").get<std::string>());
  m.y_scale_ = hex_to_double(j.at("y_scale").get<std::string>());
  m.norm_lo_ = vector_from_json(j.at("norm_lo"));
  m.norm_scale_ = vector_from_json(j.at("norm_scale"));
  m.constant_ = j.at("constant").get<bool>();
  m.jitter_escalated_ = j.at("jitter_escalated").get<bool>();
  m.y_std_ = (m.outputs_.array() - m.y_mean_) / m.y_scale_;
  m.theta_eff_ = effective_theta(m.kernel_, m.theta_, m.inputs_norm_.cols());
  if (m.constant_) {
    m.sigma2_std_ = hex_to_double(j.at("sigma2_std").get<std::string>());
    m.cll_ = hex_to_double(j.at("cll").get<std::string>());
    return m;
  }
  m.factorize();
  return m;
}

}  // namespace msego
