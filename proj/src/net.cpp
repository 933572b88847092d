#include "quadnav/net.hpp"

#include <cmath>
#include <stdexcept>

namespace quadnav {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
}

PolicyNet::PolicyNet(int obs_dim, int act_dim, int hidden, double log_std_init,
                     uint64_t seed)
    : obs_dim_(obs_dim), act_dim_(act_dim), hidden_(hidden) {
  int h = hidden, in = obs_dim, a = act_dim;
  int n = 0;
  o_Wiz_ = n; n += h * in;
  o_Wir_ = n; n += h * in;
  o_Win_ = n; n += h * in;
  o_Whz_ = n; n += h * h;
  o_Whr_ = n; n += h * h;
  o_Whn_ = n; n += h * h;
  o_bz_ = n; n += h;
  o_br_ = n; n += h;
  o_bin_ = n; n += h;
  o_bhn_ = n; n += h;
  o_Wmu_ = n; n += a * h;
  o_bmu_ = n; n += a;
  o_logstd_ = n; n += a;
  o_Wv_ = n; n += h;
  o_bv_ = n; n += 1;
  theta_ = VectorXd::Zero(n);

  Rng rng(hash_mix(seed, 0x9e7));
  auto init_block = [&](int off, int rows, int cols, int fan_in) {
    double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < rows * cols; ++i)
      theta_[off + i] = rng.uniform(-s, s);
  };
  init_block(o_Wiz_, h, in, in);
  init_block(o_Wir_, h, in, in);
  init_block(o_Win_, h, in, in);
  init_block(o_Whz_, h, h, h);
  init_block(o_Whr_, h, h, h);
  init_block(o_Whn_, h, h, h);
  init_block(o_Wmu_, a, h, h);
  init_block(o_Wv_, 1, h, h);
  for (int j = 0; j < a; ++j) theta_[o_logstd_ + j] = log_std_init;
}

#define MAT(off, rows, cols) \
  Map<const MatrixXd>(theta_.data() + (off), (rows), (cols))
#define VEC(off, len) Map<const VectorXd>(theta_.data() + (off), (len))
#define GMAT(off, rows, cols) \
  Map<MatrixXd>(grad.data() + (off), (rows), (cols))
#define GVEC(off, len) Map<VectorXd>(grad.data() + (off), (len))

void PolicyNet::forward(const MatrixXd& X, const MatrixXd& H, MatrixXd* mu,
                        VectorXd* v, MatrixXd* Hn, Cache* cache) const {
  int h = hidden_, in = obs_dim_, a = act_dim_;
  long B = X.cols();
  auto sigmoid = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };

  MatrixXd z = ((MAT(o_Wiz_, h, in) * X + MAT(o_Whz_, h, h) * H).colwise() +
                VEC(o_bz_, h))
                   .unaryExpr(sigmoid);
  MatrixXd r = ((MAT(o_Wir_, h, in) * X + MAT(o_Whr_, h, h) * H).colwise() +
                VEC(o_br_, h))
                   .unaryExpr(sigmoid);
  MatrixXd a_h = (MAT(o_Whn_, h, h) * H).colwise() + VEC(o_bhn_, h);
  MatrixXd n_pre =
      ((MAT(o_Win_, h, in) * X).colwise() + VEC(o_bin_, h)) + r.cwiseProduct(a_h);
  MatrixXd n = n_pre.array().tanh();
  MatrixXd h_new =
      (MatrixXd::Ones(h, B) - z).cwiseProduct(n) + z.cwiseProduct(H);

  if (mu) *mu = (MAT(o_Wmu_, a, h) * h_new).colwise() + VEC(o_bmu_, a);
  if (v)
    *v = (MAT(o_Wv_, 1, h) * h_new).transpose().col(0).array() + theta_[o_bv_];
  if (Hn) *Hn = h_new;
  if (cache) {
    cache->x = X;
    cache->h_prev = H;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->n = std::move(n);
    cache->a_h = std::move(a_h);
    cache->h_new = std::move(h_new);
  }
}

MatrixXd PolicyNet::backward(const Cache& c, const MatrixXd& dmu,
                             const VectorXd& dv, const MatrixXd& dHnew,
                             VectorXd& grad) const {
  int h = hidden_, in = obs_dim_, a = act_dim_;

  // head gradients
  GMAT(o_Wmu_, a, h).noalias() += dmu * c.h_new.transpose();
  GVEC(o_bmu_, a) += dmu.rowwise().sum();
  GMAT(o_Wv_, 1, h).noalias() += dv.transpose() * c.h_new.transpose();
  grad[o_bv_] += dv.sum();

  MatrixXd dh = MAT(o_Wmu_, a, h).transpose() * dmu +
                MAT(o_Wv_, 1, h).transpose() * dv.transpose() + dHnew;

  // GRU cell
  MatrixXd dz = dh.cwiseProduct(c.h_prev - c.n);
  MatrixXd dn = dh.cwiseProduct(
      (MatrixXd::Ones(h, dh.cols()) - c.z));
  MatrixXd dh_prev = dh.cwiseProduct(c.z);

  MatrixXd dn_pre = dn.cwiseProduct(
      MatrixXd::Ones(h, dh.cols()) - c.n.cwiseProduct(c.n));
  GMAT(o_Win_, h, in).noalias() += dn_pre * c.x.transpose();
  GVEC(o_bin_, h) += dn_pre.rowwise().sum();
  MatrixXd dr = dn_pre.cwiseProduct(c.a_h);
  MatrixXd da_h = dn_pre.cwiseProduct(c.r);
  GMAT(o_Whn_, h, h).noalias() += da_h * c.h_prev.transpose();
  GVEC(o_bhn_, h) += da_h.rowwise().sum();
  dh_prev.noalias() += MAT(o_Whn_, h, h).transpose() * da_h;

  MatrixXd dz_pre = dz.cwiseProduct(c.z).cwiseProduct(
      MatrixXd::Ones(h, dh.cols()) - c.z);
  GMAT(o_Wiz_, h, in).noalias() += dz_pre * c.x.transpose();
  GMAT(o_Whz_, h, h).noalias() += dz_pre * c.h_prev.transpose();
  GVEC(o_bz_, h) += dz_pre.rowwise().sum();
  dh_prev.noalias() += MAT(o_Whz_, h, h).transpose() * dz_pre;

  MatrixXd dr_pre = dr.cwiseProduct(c.r).cwiseProduct(
      MatrixXd::Ones(h, dh.cols()) - c.r);
  GMAT(o_Wir_, h, in).noalias() += dr_pre * c.x.transpose();
  GMAT(o_Whr_, h, h).noalias() += dr_pre * c.h_prev.transpose();
  GVEC(o_br_, h) += dr_pre.rowwise().sum();
  dh_prev.noalias() += MAT(o_Whr_, h, h).transpose() * dr_pre;

  return dh_prev;
}

VectorXd PolicyNet::log_std() const { return VEC(o_logstd_, act_dim_); }

void PolicyNet::accumulate_log_std_grad(const VectorXd& d,
                                        VectorXd& grad) const {
  GVEC(o_logstd_, act_dim_) += d;
}

double PolicyNet::entropy() const {
  // sum_j (log sigma_j + 0.5 log(2 pi e))
  return log_std().sum() + 0.5 * act_dim_ * (kLog2Pi + 1.0);
}

VectorXd PolicyNet::log_prob(const MatrixXd& mu, const MatrixXd& actions) const {
  VectorXd ls = log_std();
  VectorXd inv_var = (-2.0 * ls.array()).exp();
  long B = mu.cols();
  VectorXd out(B);
  for (long b = 0; b < B; ++b) {
    double lp = -0.5 * act_dim_ * kLog2Pi - ls.sum();
    for (int j = 0; j < act_dim_; ++j) {
      double e = actions(j, b) - mu(j, b);
      lp -= 0.5 * e * e * inv_var[j];
    }
    out[b] = lp;
  }
  return out;
}

#undef MAT
#undef VEC
#undef GMAT
#undef GVEC

Adam::Adam(int n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_ = VectorXd::Zero(n);
  v_ = VectorXd::Zero(n);
}

void Adam::step(VectorXd& params, const VectorXd& grad) {
  if (grad.size() != params.size() || grad.size() != m_.size())
    throw std::invalid_argument("Adam dimension mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_.array() + (1.0 - beta2_) * grad.array().square();
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -=
      lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

void Adam::restore(const VectorXd& m, const VectorXd& v, int64_t t) {
  m_ = m;
  v_ = v;
  t_ = t;
}

double clip_grad_norm(VectorXd& grad, double max_norm) {
  double norm = grad.norm();
  if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
  return norm;
}

}  // namespace quadnav
