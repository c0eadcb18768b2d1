#include "regid/kernels.hpp"

#include <cmath>

namespace regid {

std::string kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::AkaikeSmoothness: return "akaike_smoothness";
    case KernelFamily::DiagExp: return "diag_exp";
    case KernelFamily::PowerDecay: return "power_decay";
    case KernelFamily::TC: return "tc";
    case KernelFamily::BlockDiagMIMO: return "block_diag_mimo";
    case KernelFamily::ConicCombo: return "conic_combo";
    case KernelFamily::StableHankelPrecision: return "stable_hankel_precision";
  }
  throw std::logic_error("kernel_family_name: unknown family");
}

KernelFamily kernel_family_from_name(const std::string& name) {
  if (name == "akaike_smoothness") return KernelFamily::AkaikeSmoothness;
  if (name == "diag_exp") return KernelFamily::DiagExp;
  if (name == "power_decay") return KernelFamily::PowerDecay;
  if (name == "tc") return KernelFamily::TC;
  if (name == "block_diag_mimo") return KernelFamily::BlockDiagMIMO;
  if (name == "conic_combo") return KernelFamily::ConicCombo;
  if (name == "stable_hankel_precision") return KernelFamily::StableHankelPrecision;
  throw std::invalid_argument("unknown kernel family: " + name);
}

namespace {

KernelSpec scalar_spec(KernelFamily family, Eigen::Index T, double scale,
                       std::initializer_list<double> shape, double Tc = 1.0) {
  KernelSpec spec;
  spec.family = family;
  spec.dims = KernelDims{T, 1, 1};
  spec.sample_time = Tc;
  spec.scale = Eigen::VectorXd::Constant(1, scale);
  spec.shape.resize(static_cast<Eigen::Index>(shape.size()));
  Eigen::Index i = 0;
  for (double s : shape) spec.shape[i++] = s;
  return spec;
}

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

KernelMatrix akaike_smoothness_kernel(Eigen::Index T, double gamma) {
  require(T >= 1, "akaike_smoothness_kernel: T must be >= 1");
  require(gamma > 0.0, "akaike_smoothness_kernel: gamma must be positive");
  // the quadratic-decay special case of the power-decay family; sharing the
  // arithmetic keeps the two construction routes bit-identical
  KernelMatrix out = power_decay_kernel(T, 1.0 / gamma, 2.0);
  // recorded scale is the multiplicative 1/gamma, so a zero scale always
  // means a degenerate (zero) prior
  out.spec = scalar_spec(KernelFamily::AkaikeSmoothness, T, 1.0 / gamma, {});
  return out;
}

KernelMatrix diag_exp_kernel(Eigen::Index T, double lambda, double rho) {
  require(T >= 1, "diag_exp_kernel: T must be >= 1");
  require(lambda > 0.0, "diag_exp_kernel: lambda must be positive");
  require(rho > 0.0 && rho < 1.0, "diag_exp_kernel: rho must lie in (0,1)");
  Eigen::VectorXd diag(T);
  double v = lambda;
  for (Eigen::Index k = 0; k < T; ++k, v *= rho) diag[k] = v;
  return KernelMatrix{diag.asDiagonal(), scalar_spec(KernelFamily::DiagExp, T, lambda, {rho})};
}

KernelMatrix power_decay_kernel(Eigen::Index T, double lambda, double alpha) {
  require(T >= 1, "power_decay_kernel: T must be >= 1");
  require(lambda > 0.0, "power_decay_kernel: lambda must be positive");
  require(alpha > 1.0, "power_decay_kernel: alpha must exceed 1");
  Eigen::VectorXd diag(T);
  for (Eigen::Index k = 1; k <= T; ++k)
    diag[k - 1] = lambda * std::pow(static_cast<double>(k), -alpha);
  return KernelMatrix{diag.asDiagonal(),
                      scalar_spec(KernelFamily::PowerDecay, T, lambda, {alpha})};
}

KernelMatrix tc_kernel(Eigen::Index T, double lambda, double beta, double Tc) {
  require(T >= 1, "tc_kernel: T must be >= 1");
  require(lambda > 0.0, "tc_kernel: lambda must be positive");
  require(beta > 0.0, "tc_kernel: beta must be positive");
  require(Tc > 0.0, "tc_kernel: Tc must be positive");
  Eigen::MatrixXd K(T, T);
  for (Eigen::Index i = 1; i <= T; ++i)
    for (Eigen::Index j = 1; j <= T; ++j)
      K(i - 1, j - 1) = lambda * std::exp(-beta * Tc * static_cast<double>(std::max(i, j)));
  return KernelMatrix{std::move(K), scalar_spec(KernelFamily::TC, T, lambda, {beta}, Tc)};
}

BasisExpansion tc_basis(Eigen::Index T, double beta, double Tc, int B) {
  require(T >= 1, "tc_basis: T must be >= 1");
  require(beta > 0.0 && Tc > 0.0, "tc_basis: beta and Tc must be positive");
  require(B >= 1, "tc_basis: B must be >= 1");
  BasisExpansion expansion;
  expansion.vectors.reserve(static_cast<std::size_t>(B));
  expansion.weights_l1.resize(B);
  Eigen::VectorXd warped(T);
  for (Eigen::Index k = 1; k <= T; ++k)
    warped[k - 1] = std::exp(-beta * Tc * static_cast<double>(k));
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < B; ++i) {
    Eigen::VectorXd psi(T);
    if (i == 0) {
      psi = warped;
    } else {
      const double c = pi * static_cast<double>(i);
      psi = (std::sqrt(2.0) / c) * (c * warped.array()).sin().matrix();
    }
    expansion.weights_l1[i] = psi.lpNorm<1>();
    expansion.vectors.push_back(std::move(psi));
  }
  return expansion;
}

KernelMatrix ar1_kernel(Eigen::Index T, double c, double lambda_ar) {
  require(T >= 1, "ar1_kernel: T must be >= 1");
  require(c > 0.0, "ar1_kernel: c must be positive");
  require(lambda_ar > 0.0 && lambda_ar < 1.0, "ar1_kernel: lambda_ar must lie in (0,1)");
  Eigen::MatrixXd K(T, T);
  for (Eigen::Index i = 1; i <= T; ++i)
    for (Eigen::Index j = 1; j <= T; ++j)
      K(i - 1, j - 1) = c * std::pow(lambda_ar, static_cast<double>(std::max(i, j)));
  KernelSpec spec = scalar_spec(KernelFamily::TC, T, c, {-std::log(lambda_ar)});
  return KernelMatrix{std::move(K), std::move(spec)};
}

Eigen::MatrixXd ar1_precision(Eigen::Index T, double c, double lambda_ar) {
  require(T >= 1, "ar1_precision: T must be >= 1");
  require(c > 0.0, "ar1_precision: c must be positive");
  require(lambda_ar > 0.0 && lambda_ar < 1.0, "ar1_precision: lambda_ar must lie in (0,1)");
  // K = c * D A D with D = diag(lar^(k/2)) and A the stationary AR(1)
  // correlation with rho = sqrt(lar), whose inverse is tridiagonal.
  const double rho = std::sqrt(lambda_ar);
  const double s = 1.0 / (1.0 - rho * rho);
  Eigen::MatrixXd Ainv = Eigen::MatrixXd::Zero(T, T);
  for (Eigen::Index k = 0; k < T; ++k) {
    Ainv(k, k) = (k == 0 || k == T - 1) ? s : s * (1.0 + rho * rho);
    if (k + 1 < T) {
      Ainv(k, k + 1) = -s * rho;
      Ainv(k + 1, k) = -s * rho;
    }
  }
  if (T == 1) Ainv(0, 0) = 1.0;
  Eigen::VectorXd dinv(T);
  for (Eigen::Index k = 1; k <= T; ++k)
    dinv[k - 1] = std::pow(lambda_ar, -static_cast<double>(k) / 2.0);
  return (1.0 / c) * dinv.asDiagonal() * Ainv * dinv.asDiagonal();
}

Eigen::MatrixXd realize_channel_kernel(const KernelSpec& spec) {
  require(spec.dims.p == 1 && spec.dims.m == 1,
          "realize_channel_kernel: spec must describe a scalar channel");
  const Eigen::Index T = spec.dims.T;
  const double scale = spec.scale.size() > 0 ? spec.scale[0] : 0.0;
  require(scale >= 0.0, "realize_channel_kernel: negative scale");
  if (scale == 0.0) return Eigen::MatrixXd::Zero(T, T);
  switch (spec.family) {
    case KernelFamily::AkaikeSmoothness:
      return akaike_smoothness_kernel(T, 1.0 / scale).K;
    case KernelFamily::DiagExp:
      return diag_exp_kernel(T, scale, spec.shape[0]).K;
    case KernelFamily::PowerDecay:
      return power_decay_kernel(T, scale, spec.shape[0]).K;
    case KernelFamily::TC:
      return tc_kernel(T, scale, spec.shape[0], spec.sample_time).K;
    default:
      throw std::invalid_argument("realize_channel_kernel: unsupported family for a channel");
  }
}

KernelMatrix block_diag_mimo(const std::vector<KernelSpec>& channel_specs, Eigen::Index p,
                             Eigen::Index m) {
  require(p >= 1 && m >= 1, "block_diag_mimo: p and m must be >= 1");
  require(static_cast<Eigen::Index>(channel_specs.size()) == p * m,
          "block_diag_mimo: expected one spec per channel");
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(channel_specs.size());
  for (const auto& spec : channel_specs) blocks.push_back(realize_channel_kernel(spec));
  KernelMatrix out = block_diag_mimo(blocks, p, m);
  out.spec.family = KernelFamily::BlockDiagMIMO;
  out.spec.scale.resize(static_cast<Eigen::Index>(channel_specs.size()));
  for (std::size_t i = 0; i < channel_specs.size(); ++i)
    out.spec.scale[static_cast<Eigen::Index>(i)] =
        channel_specs[i].scale.size() > 0 ? channel_specs[i].scale[0] : 0.0;
  return out;
}

KernelMatrix block_diag_mimo(const std::vector<Eigen::MatrixXd>& blocks, Eigen::Index p,
                             Eigen::Index m) {
  require(p >= 1 && m >= 1, "block_diag_mimo: p and m must be >= 1");
  require(static_cast<Eigen::Index>(blocks.size()) == p * m,
          "block_diag_mimo: expected one block per channel");
  const Eigen::Index T = blocks.front().rows();
  for (const auto& block : blocks)
    require(block.rows() == T && block.cols() == T,
            "block_diag_mimo: all blocks must share the same T");
  const Eigen::Index d = p * m * T;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index c = 0; c < p * m; ++c)
    K.block(c * T, c * T, T, T) = blocks[static_cast<std::size_t>(c)];
  KernelMatrix out;
  out.K = std::move(K);
  out.spec.family = KernelFamily::BlockDiagMIMO;
  out.spec.dims = KernelDims{T, p, m};
  return out;
}

KernelMatrix conic_combination(const std::vector<KernelMatrix>& kernels,
                               const Eigen::VectorXd& weights) {
  require(!kernels.empty(), "conic_combination: empty kernel list");
  require(weights.size() == static_cast<Eigen::Index>(kernels.size()),
          "conic_combination: one weight per kernel required");
  require((weights.array() >= 0.0).all(), "conic_combination: weights must be nonnegative");
  require(weights.sum() > 0.0, "conic_combination: all-zero weights");
  const Eigen::Index d = kernels.front().K.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    require(kernels[i].K.rows() == d && kernels[i].K.cols() == d,
            "conic_combination: dimension mismatch");
    K += weights[static_cast<Eigen::Index>(i)] * kernels[i].K;
  }
  KernelMatrix out;
  out.K = std::move(K);
  out.spec.family = KernelFamily::ConicCombo;
  out.spec.scale = weights;
  out.spec.dims = kernels.front().spec.dims;
  return out;
}

bool is_psd(const Eigen::MatrixXd& K, double rel_tol) {
  if (K.rows() != K.cols()) return false;
  const Eigen::MatrixXd sym = 0.5 * (K + K.transpose());
  if ((K - sym).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sym.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return false;
  const double max_eig = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  return eig.eigenvalues().minCoeff() >= -rel_tol * std::max(max_eig, 1e-300);
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd sym = 0.5 * (K + K.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw std::runtime_error("psd_factor: eigensolver failed");
  Eigen::VectorXd vals = eig.eigenvalues();
  const double floor = 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = std::max(vals[i], floor);
  return eig.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

// -- KernelTemplate -----------------------------------------------------------

Eigen::Index KernelTemplate::n_scales() const {
  if (fixed_base.has_value()) return 1;
  if (family == KernelFamily::BlockDiagMIMO) return dims.p * dims.m;
  return 1;
}

Eigen::Index KernelTemplate::n_shapes() const {
  if (fixed_base.has_value()) return 0;
  switch (family) {
    case KernelFamily::AkaikeSmoothness: return 0;
    case KernelFamily::DiagExp:
    case KernelFamily::PowerDecay:
    case KernelFamily::TC: return 1;
    case KernelFamily::BlockDiagMIMO:
      if (block_family == KernelFamily::AkaikeSmoothness) return 0;
      return shared_shape ? 1 : dims.p * dims.m;
    default:
      throw std::invalid_argument("KernelTemplate: unsupported family");
  }
}

void KernelTemplate::validate() const {
  if (dims.T < 1) throw std::invalid_argument("KernelTemplate: T must be >= 1");
  if (lower.size() != n_free() || upper.size() != n_free())
    throw std::invalid_argument("KernelTemplate: bounds must cover every free parameter");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] > 0.0) || !std::isfinite(upper[i]) || lower[i] > upper[i])
      throw std::invalid_argument("KernelTemplate: bounds must be finite, positive, ordered");
  }
}

namespace {

KernelSpec channel_spec_from(KernelFamily family, Eigen::Index T, double Tc, double scale,
                             double shape) {
  KernelSpec spec;
  spec.family = family;
  spec.dims = KernelDims{T, 1, 1};
  spec.sample_time = Tc;
  spec.scale = Eigen::VectorXd::Constant(1, scale);
  if (family != KernelFamily::AkaikeSmoothness)
    spec.shape = Eigen::VectorXd::Constant(1, shape);
  return spec;
}

Eigen::MatrixXd channel_gradient_scale(KernelFamily family, Eigen::Index T, double Tc,
                                       double shape) {
  // dK/dscale at unit scale
  return realize_channel_kernel(channel_spec_from(family, T, Tc, 1.0, shape));
}

Eigen::MatrixXd channel_gradient_shape(KernelFamily family, Eigen::Index T, double Tc,
                                       double scale, double shape) {
  Eigen::MatrixXd dK = Eigen::MatrixXd::Zero(T, T);
  switch (family) {
    case KernelFamily::DiagExp:
      for (Eigen::Index k = 2; k <= T; ++k)
        dK(k - 1, k - 1) =
            scale * static_cast<double>(k - 1) * std::pow(shape, static_cast<double>(k - 2));
      break;
    case KernelFamily::PowerDecay:
      for (Eigen::Index k = 1; k <= T; ++k) {
        const double kd = static_cast<double>(k);
        dK(k - 1, k - 1) = -scale * std::log(kd) * std::pow(kd, -shape);
      }
      break;
    case KernelFamily::TC:
      for (Eigen::Index i = 1; i <= T; ++i)
        for (Eigen::Index j = 1; j <= T; ++j) {
          const double mx = static_cast<double>(std::max(i, j));
          dK(i - 1, j - 1) = -mx * Tc * scale * std::exp(-shape * Tc * mx);
        }
      break;
    default:
      throw std::invalid_argument("KernelTemplate: no shape gradient for this family");
  }
  return dK;
}

}  // namespace

Eigen::MatrixXd KernelTemplate::realize(const Eigen::VectorXd& theta) const {
  if (theta.size() != n_free())
    throw std::invalid_argument("KernelTemplate::realize: wrong parameter count");
  if (fixed_base.has_value()) return theta[0] * (*fixed_base);
  if (family == KernelFamily::BlockDiagMIMO) {
    const Eigen::Index channels = dims.p * dims.m;
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(static_cast<std::size_t>(channels));
    for (Eigen::Index c = 0; c < channels; ++c) {
      const double shape =
          n_shapes() > 0 ? theta[n_scales() + (shared_shape ? 0 : c)] : 0.0;
      blocks.push_back(realize_channel_kernel(
          channel_spec_from(block_family, dims.T, sample_time, theta[c], shape)));
    }
    return block_diag_mimo(blocks, dims.p, dims.m).K;
  }
  const double shape = n_shapes() > 0 ? theta[1] : 0.0;
  return realize_channel_kernel(channel_spec_from(family, dims.T, sample_time, theta[0], shape));
}

Eigen::MatrixXd KernelTemplate::realize_factor(const Eigen::VectorXd& theta) const {
  if (theta.size() != n_free())
    throw std::invalid_argument("KernelTemplate::realize_factor: wrong parameter count");
  if (fixed_base.has_value()) return std::sqrt(theta[0]) * psd_factor(*fixed_base);
  auto channel_factor = [&](KernelFamily fam, double scale, double shape) -> Eigen::MatrixXd {
    if (scale == 0.0) return Eigen::MatrixXd::Zero(dims.T, dims.T);
    if (fam == KernelFamily::TC)
      return psd_factor(tc_kernel(dims.T, scale, shape, sample_time).K);
    const Eigen::MatrixXd K =
        realize_channel_kernel(channel_spec_from(fam, dims.T, sample_time, scale, shape));
    return K.diagonal().cwiseSqrt().asDiagonal();  // remaining families are diagonal
  };
  if (family == KernelFamily::BlockDiagMIMO) {
    const Eigen::Index channels = dims.p * dims.m;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dims.d(), dims.d());
    for (Eigen::Index c = 0; c < channels; ++c) {
      const double shape =
          n_shapes() > 0 ? theta[n_scales() + (shared_shape ? 0 : c)] : 0.0;
      L.block(c * dims.T, c * dims.T, dims.T, dims.T) =
          channel_factor(block_family, theta[c], shape);
    }
    return L;
  }
  return channel_factor(family, theta[0], n_shapes() > 0 ? theta[1] : 0.0);
}

std::vector<Eigen::MatrixXd> KernelTemplate::gradients(const Eigen::VectorXd& theta) const {
  if (theta.size() != n_free())
    throw std::invalid_argument("KernelTemplate::gradients: wrong parameter count");
  std::vector<Eigen::MatrixXd> out;
  if (fixed_base.has_value()) {
    out.push_back(*fixed_base);
    return out;
  }
  if (family == KernelFamily::BlockDiagMIMO) {
    const Eigen::Index channels = dims.p * dims.m;
    const Eigen::Index d = dims.d();
    for (Eigen::Index c = 0; c < channels; ++c) {
      const double shape =
          n_shapes() > 0 ? theta[n_scales() + (shared_shape ? 0 : c)] : 0.0;
      Eigen::MatrixXd dK = Eigen::MatrixXd::Zero(d, d);
      dK.block(c * dims.T, c * dims.T, dims.T, dims.T) =
          channel_gradient_scale(block_family, dims.T, sample_time, shape);
      out.push_back(std::move(dK));
    }
    for (Eigen::Index s = 0; s < n_shapes(); ++s) {
      Eigen::MatrixXd dK = Eigen::MatrixXd::Zero(d, d);
      for (Eigen::Index c = 0; c < channels; ++c) {
        if (!shared_shape && c != s) continue;
        const double shape = theta[n_scales() + (shared_shape ? 0 : c)];
        dK.block(c * dims.T, c * dims.T, dims.T, dims.T) =
            channel_gradient_shape(block_family, dims.T, sample_time, theta[c], shape);
      }
      out.push_back(std::move(dK));
    }
    return out;
  }
  const double shape = n_shapes() > 0 ? theta[1] : 0.0;
  out.push_back(channel_gradient_scale(family, dims.T, sample_time, shape));
  if (n_shapes() > 0)
    out.push_back(channel_gradient_shape(family, dims.T, sample_time, theta[0], shape));
  return out;
}

KernelSpec KernelTemplate::to_spec(const Eigen::VectorXd& theta) const {
  KernelSpec spec;
  spec.family = family;
  spec.dims = dims;
  spec.sample_time = sample_time;
  spec.scale = theta.head(n_scales());
  spec.shape = theta.tail(n_shapes());
  return spec;
}

namespace {

KernelTemplate make_template(KernelFamily family, Eigen::Index T, double Tc,
                             std::initializer_list<double> lo, std::initializer_list<double> hi) {
  KernelTemplate t;
  t.family = family;
  t.dims = KernelDims{T, 1, 1};
  t.sample_time = Tc;
  t.lower.resize(static_cast<Eigen::Index>(lo.size()));
  t.upper.resize(static_cast<Eigen::Index>(hi.size()));
  Eigen::Index i = 0;
  for (double v : lo) t.lower[i++] = v;
  i = 0;
  for (double v : hi) t.upper[i++] = v;
  t.validate();
  return t;
}

}  // namespace

KernelTemplate KernelTemplate::tc(Eigen::Index T, double Tc) {
  return make_template(KernelFamily::TC, T, Tc, {1e-8, 1e-2}, {1e4, 5.0});
}

KernelTemplate KernelTemplate::diag_exp(Eigen::Index T) {
  return make_template(KernelFamily::DiagExp, T, 1.0, {1e-8, 1e-4}, {1e4, 0.9999});
}

KernelTemplate KernelTemplate::power_decay(Eigen::Index T) {
  return make_template(KernelFamily::PowerDecay, T, 1.0, {1e-8, 1.0 + 1e-4}, {1e4, 8.0});
}

KernelTemplate KernelTemplate::akaike(Eigen::Index T) {
  return make_template(KernelFamily::AkaikeSmoothness, T, 1.0, {1e-8}, {1e4});
}

KernelTemplate KernelTemplate::mimo(KernelFamily block_family, Eigen::Index T, Eigen::Index p,
                                    Eigen::Index m, double Tc, bool shared_shape) {
  KernelTemplate t;
  t.family = KernelFamily::BlockDiagMIMO;
  t.block_family = block_family;
  t.dims = KernelDims{T, p, m};
  t.sample_time = Tc;
  t.shared_shape = shared_shape;
  const KernelTemplate scalar = [&] {
    switch (block_family) {
      case KernelFamily::TC: return tc(T, Tc);
      case KernelFamily::DiagExp: return diag_exp(T);
      case KernelFamily::PowerDecay: return power_decay(T);
      case KernelFamily::AkaikeSmoothness: return akaike(T);
      default: throw std::invalid_argument("KernelTemplate::mimo: unsupported block family");
    }
  }();
  t.lower.resize(t.n_free());
  t.upper.resize(t.n_free());
  t.lower.head(t.n_scales()).setConstant(scalar.lower[0]);
  t.upper.head(t.n_scales()).setConstant(scalar.upper[0]);
  if (scalar.n_shapes() > 0) {
    t.lower.tail(t.n_shapes()).setConstant(scalar.lower[1]);
    t.upper.tail(t.n_shapes()).setConstant(scalar.upper[1]);
  }
  t.validate();
  return t;
}

KernelTemplate KernelTemplate::fixed_shape(const Eigen::MatrixXd& base) {
  if (base.rows() != base.cols() || base.rows() < 1)
    throw std::invalid_argument("KernelTemplate::fixed_shape: base must be square");
  KernelTemplate t;
  t.family = KernelFamily::ConicCombo;  // scale-only; family is informational here
  t.dims = KernelDims{base.rows(), 1, 1};
  t.fixed_base = base;
  t.lower = Eigen::VectorXd::Constant(1, 1e-8);
  t.upper = Eigen::VectorXd::Constant(1, 1e4);
  t.validate();
  return t;
}

}  // namespace regid
