#include "rwt/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>

#include "rwt/datamodel/types.hpp"

namespace rwt::nn {

namespace {

using MatR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

void im2col(const float* x, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, float* col) {
  const int p = oh * ow;
  for (int ci = 0; ci < c; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* row = col + static_cast<std::size_t>((ci * k + ky) * k + kx) * p;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          float* dst = row + oy * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, 0.0f);
            continue;
          }
          const float* src = x + (static_cast<std::size_t>(ci) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const float* col, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, float* x) {
  const int p = oh * ow;
  for (int ci = 0; ci < c; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* row =
            col + static_cast<std::size_t>((ci * k + ky) * k + kx) * p;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          float* dst = x + (static_cast<std::size_t>(ci) * h + iy) * w;
          const float* src = row + oy * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

struct Tap {
  int i0, i1;
  float frac;
};

// Source taps for a half-pixel-centred resize along one axis.
std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double s = (o + 0.5) * scale - 0.5;
    if (s < 0.0) s = 0.0;
    int i0 = static_cast<int>(std::floor(s));
    if (i0 > in - 1) i0 = in - 1;
    const int i1 = std::min(i0 + 1, in - 1);
    taps[o] = {i0, i1, static_cast<float>(s - i0)};
  }
  return taps;
}

Tensor resize_planes(const Tensor& x, int out_h, int out_w) {
  const Shape& s = x.shape();
  const auto ty = bilinear_taps(s.h, out_h);
  const auto tx = bilinear_taps(s.w, out_w);
  Tensor out(Shape{s.n, s.c, out_h, out_w});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const float* src = x.data() + (static_cast<std::size_t>(n) * s.c + c) * s.plane_size();
      float* dst = out.data() + (static_cast<std::size_t>(n) * s.c + c) * out_h * out_w;
      for (int y = 0; y < out_h; ++y) {
        const Tap& a = ty[y];
        const float* r0 = src + static_cast<std::size_t>(a.i0) * s.w;
        const float* r1 = src + static_cast<std::size_t>(a.i1) * s.w;
        for (int xo = 0; xo < out_w; ++xo) {
          const Tap& b = tx[xo];
          // Lerp form a + t*(b-a) keeps constant inputs exact.
          const float top = r0[b.i0] + b.frac * (r0[b.i1] - r0[b.i0]);
          const float bot = r1[b.i0] + b.frac * (r1[b.i1] - r1[b.i0]);
          dst[y * out_w + xo] = top + a.frac * (bot - top);
        }
      }
    }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, int kernel,
               int stride, int padding, bool with_bias)
    : in_c_(in_channels),
      out_c_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(padding),
      has_bias_(with_bias),
      weight_(name + ".weight", Shape{out_channels, in_channels, kernel, kernel}) {
  if (with_bias) bias_ = Parameter(name + ".bias", Shape{1, out_channels, 1, 1});
}

Shape Conv2d::output_shape(const Shape& in) const {
  return Shape{in.n, out_c_, (in.h + 2 * pad_ - k_) / stride_ + 1,
               (in.w + 2 * pad_ - k_) / stride_ + 1};
}

void Conv2d::init_kaiming(std::mt19937_64& rng) {
  const float stddev = std::sqrt(2.0f / static_cast<float>(out_c_ * k_ * k_));
  std::normal_distribution<float> dist(0.0f, stddev);
  for (float& v : weight_.value.values()) v = dist(rng);
  if (has_bias_) bias_.value.fill(0.0f);
}

void Conv2d::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

Tensor Conv2d::forward(const Tensor& x) {
  const Shape& s = x.shape();
  if (s.c != in_c_) {
    throw Error("conv " + weight_.name + ": expected " +
                                std::to_string(in_c_) + " input channels, got " +
                                std::to_string(s.c));
  }
  input_ = x;
  const Shape os = output_shape(s);
  const int kk = in_c_ * k_ * k_;
  const int p = os.h * os.w;
  col_.resize(static_cast<std::size_t>(kk) * p);
  Tensor out(os);
  CMapR w(weight_.value.data(), out_c_, kk);
  for (int n = 0; n < s.n; ++n) {
    im2col(x.sample(n), s.c, s.h, s.w, k_, stride_, pad_, os.h, os.w, col_.data());
    MapR y(out.sample(n), out_c_, p);
    y.noalias() = w * CMapR(col_.data(), kk, p);
    if (has_bias_) {
      for (int o = 0; o < out_c_; ++o) y.row(o).array() += bias_.value[o];
    }
  }
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out, bool need_input_grad) {
  const Shape& s = input_.shape();
  const Shape os = output_shape(s);
  if (!(grad_out.shape() == os)) {
    throw Error("conv " + weight_.name + ": gradient shape mismatch");
  }
  const int kk = in_c_ * k_ * k_;
  const int p = os.h * os.w;
  col_.resize(static_cast<std::size_t>(kk) * p);
  FloatBuffer dcol(need_input_grad ? col_.size() : 0);
  Tensor dx(need_input_grad ? s : Shape{});
  CMapR w(weight_.value.data(), out_c_, kk);
  MapR dw(weight_.grad.data(), out_c_, kk);
  for (int n = 0; n < s.n; ++n) {
    CMapR g(grad_out.sample(n), out_c_, p);
    im2col(input_.sample(n), s.c, s.h, s.w, k_, stride_, pad_, os.h, os.w,
           col_.data());
    dw.noalias() += g * CMapR(col_.data(), kk, p).transpose();
    if (has_bias_) {
      for (int o = 0; o < out_c_; ++o) {
        const float* row = grad_out.sample(n) + static_cast<std::size_t>(o) * p;
        double acc = 0;
        for (int i = 0; i < p; ++i) acc += row[i];
        bias_.grad[o] += static_cast<float>(acc);
      }
    }
    if (need_input_grad) {
      MapR(dcol.data(), kk, p).noalias() = w.transpose() * g;
      col2im(dcol.data(), s.c, s.h, s.w, k_, stride_, pad_, os.h, os.w,
             dx.sample(n));
    }
  }
  return dx;
}

// ----------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(std::string name, int channels)
    : name_(std::move(name)),
      channels_(channels),
      gamma_(name_ + ".gamma", Shape{1, channels, 1, 1}),
      beta_(name_ + ".beta", Shape{1, channels, 1, 1}),
      running_mean_(Shape{1, channels, 1, 1}, 0.0f),
      running_var_(Shape{1, channels, 1, 1}, 1.0f) {
  gamma_.value.fill(1.0f);
}

void BatchNorm2d::collect(std::vector<Parameter*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

void BatchNorm2d::collect_buffers(std::vector<Buffer>& out) {
  out.push_back({name_ + ".running_mean", &running_mean_});
  out.push_back({name_ + ".running_var", &running_var_});
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
  const Shape& s = x.shape();
  if (s.c != channels_) throw Error("batchnorm channel mismatch");
  last_train_ = train;
  const std::size_t plane = s.plane_size();
  const double count = static_cast<double>(s.n) * plane;
  xhat_ = Tensor(s);
  inv_std_.assign(channels_, 0.0f);
  Tensor out(s);
  for (int c = 0; c < channels_; ++c) {
    float mean, var;
    if (train) {
      double sum = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const float* p = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      }
      const double m = sum / count;
      double sq = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const float* p = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = p[i] - m;
          sq += d * d;
        }
      }
      mean = static_cast<float>(m);
      var = static_cast<float>(sq / count);
      const float unbiased =
          count > 1 ? static_cast<float>(sq / (count - 1)) : var;
      running_mean_[c] = (1 - kMomentum) * running_mean_[c] + kMomentum * mean;
      running_var_[c] = (1 - kMomentum) * running_var_[c] + kMomentum * unbiased;
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const float inv = 1.0f / std::sqrt(var + kEps);
    inv_std_[c] = inv;
    const float g = gamma_.value[c], b = beta_.value[c];
    for (int n = 0; n < s.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const float xh = (x[off + i] - mean) * inv;
        xhat_[off + i] = xh;
        out[off + i] = g * xh + b;
      }
    }
  }
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  const Shape& s = xhat_.shape();
  const std::size_t plane = s.plane_size();
  const double count = static_cast<double>(s.n) * plane;
  Tensor dx(s);
  for (int c = 0; c < channels_; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (int n = 0; n < s.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_g += grad_out[off + i];
        sum_gx += static_cast<double>(grad_out[off + i]) * xhat_[off + i];
      }
    }
    gamma_.grad[c] += static_cast<float>(sum_gx);
    beta_.grad[c] += static_cast<float>(sum_g);
    const float scale = gamma_.value[c] * inv_std_[c];
    if (last_train_) {
      const float mean_g = static_cast<float>(sum_g / count);
      const float mean_gx = static_cast<float>(sum_gx / count);
      for (int n = 0; n < s.n; ++n) {
        const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i)
          dx[off + i] =
              scale * (grad_out[off + i] - mean_g - xhat_[off + i] * mean_gx);
      }
    } else {
      for (int n = 0; n < s.n; ++n) {
        const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) dx[off + i] = scale * grad_out[off + i];
      }
    }
  }
  return dx;
}

// ------------------------------------------------------------------ Relu

Tensor Relu::forward(const Tensor& x) {
  shape_ = x.shape();
  active_.resize(x.size());
  Tensor out(shape_);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool on = x[i] > 0.0f;
    active_[i] = on;
    out[i] = on ? x[i] : 0.0f;
  }
  return out;
}

Tensor Relu::backward(const Tensor& grad_out) const {
  Tensor dx(shape_);
  for (std::size_t i = 0; i < dx.size(); ++i)
    dx[i] = active_[i] ? grad_out[i] : 0.0f;
  return dx;
}

void Relu::trace(std::vector<std::int32_t>& out) const {
  out.insert(out.end(), active_.begin(), active_.end());
}

// ------------------------------------------------------------- MaxPool2d

void MaxPool2d::trace(std::vector<std::int32_t>& out) const {
  out.insert(out.end(), argmax_.begin(), argmax_.end());
}

Tensor MaxPool2d::forward(const Tensor& x) {
  in_shape_ = x.shape();
  const Shape& s = in_shape_;
  const int oh = (s.h + 2 * pad_ - k_) / stride_ + 1;
  const int ow = (s.w + 2 * pad_ - k_) / stride_ + 1;
  Tensor out(Shape{s.n, s.c, oh, ow});
  argmax_.assign(out.size(), -1);
  std::size_t o = 0;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * s.plane_size();
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox, ++o) {
          float best = -std::numeric_limits<float>::infinity();
          std::int32_t arg = -1;
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= s.h) continue;
            for (int kx = 0; kx < k_; ++kx) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix < 0 || ix >= s.w) continue;
              const float v = x[base + iy * s.w + ix];
              if (v > best) {
                best = v;
                arg = iy * s.w + ix;
              }
            }
          }
          out[o] = best;
          argmax_[o] = arg;
        }
    }
  return out;
}

Tensor MaxPool2d::backward(const Tensor& grad_out) const {
  const Shape& s = in_shape_;
  Tensor dx(s);
  const Shape& os = grad_out.shape();
  std::size_t o = 0;
  for (int n = 0; n < os.n; ++n)
    for (int c = 0; c < os.c; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * s.plane_size();
      for (std::size_t i = 0; i < os.plane_size(); ++i, ++o)
        dx[base + argmax_[o]] += grad_out[o];
    }
  return dx;
}

// --------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x) {
  in_shape_ = x.shape();
  const Shape& s = in_shape_;
  Tensor out(Shape{s.n, s.c, 1, 1});
  const std::size_t plane = s.plane_size();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const float* p = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      double sum = 0.0;
      for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      out.at(n, c, 0, 0) = static_cast<float>(sum / plane);
    }
  return out;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) const {
  const Shape& s = in_shape_;
  Tensor dx(s);
  const std::size_t plane = s.plane_size();
  const float inv = 1.0f / static_cast<float>(plane);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const float g = grad_out.at(n, c, 0, 0) * inv;
      float* p = dx.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      std::fill(p, p + plane, g);
    }
  return dx;
}

// ---------------------------------------------------------------- Linear

Linear::Linear(std::string name, int in_features, int out_features)
    : in_(in_features),
      out_(out_features),
      weight_(name + ".weight", Shape{1, 1, out_features, in_features}),
      bias_(name + ".bias", Shape{1, 1, 1, out_features}) {}

void Linear::init_uniform(std::mt19937_64& rng) {
  const float bound = 1.0f / std::sqrt(static_cast<float>(in_));
  std::uniform_real_distribution<float> dist(-bound, bound);
  for (float& v : weight_.value.values()) v = dist(rng);
  for (float& v : bias_.value.values()) v = dist(rng);
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

Tensor Linear::forward(const Tensor& x) {
  const Shape& s = x.shape();
  if (static_cast<int>(s.sample_size()) != in_) {
    throw Error("linear: expected " + std::to_string(in_) +
                                " features, got " + std::to_string(s.sample_size()));
  }
  input_ = x;
  Tensor out(Shape{s.n, out_, 1, 1});
  CMapR xin(x.data(), s.n, in_);
  CMapR w(weight_.value.data(), out_, in_);
  MapR y(out.data(), s.n, out_);
  y.noalias() = xin * w.transpose();
  for (int n = 0; n < s.n; ++n)
    for (int o = 0; o < out_; ++o) y(n, o) += bias_.value[o];
  return out;
}

Tensor Linear::backward(const Tensor& grad_out, bool need_input_grad) {
  const Shape& s = input_.shape();
  CMapR g(grad_out.data(), s.n, out_);
  CMapR xin(input_.data(), s.n, in_);
  MapR(weight_.grad.data(), out_, in_).noalias() += g.transpose() * xin;
  for (int n = 0; n < s.n; ++n)
    for (int o = 0; o < out_; ++o) bias_.grad[o] += g(n, o);
  Tensor dx(need_input_grad ? s : Shape{});
  if (need_input_grad) {
    MapR(dx.data(), s.n, in_).noalias() =
        g * CMapR(weight_.value.data(), out_, in_);
  }
  return dx;
}

// -------------------------------------------------------------- Upsample

Tensor upsample2x_bilinear(const Tensor& x) {
  return resize_planes(x, x.shape().h * 2, x.shape().w * 2);
}

Tensor upsample2x_bilinear_backward(const Tensor& grad_out) {
  const Shape& os = grad_out.shape();
  if (os.h % 2 != 0 || os.w % 2 != 0) {
    throw Error("upsample backward expects even extents");
  }
  const int ih = os.h / 2, iw = os.w / 2;
  const auto ty = bilinear_taps(ih, os.h);
  const auto tx = bilinear_taps(iw, os.w);
  Tensor dx(Shape{os.n, os.c, ih, iw});
  for (int n = 0; n < os.n; ++n)
    for (int c = 0; c < os.c; ++c) {
      const float* g = grad_out.data() + (static_cast<std::size_t>(n) * os.c + c) * os.plane_size();
      float* d = dx.data() + (static_cast<std::size_t>(n) * os.c + c) * ih * iw;
      for (int y = 0; y < os.h; ++y) {
        const Tap& a = ty[y];
        for (int xo = 0; xo < os.w; ++xo) {
          const Tap& b = tx[xo];
          const float v = g[y * os.w + xo];
          d[a.i0 * iw + b.i0] += v * (1 - a.frac) * (1 - b.frac);
          d[a.i0 * iw + b.i1] += v * (1 - a.frac) * b.frac;
          d[a.i1 * iw + b.i0] += v * a.frac * (1 - b.frac);
          d[a.i1 * iw + b.i1] += v * a.frac * b.frac;
        }
      }
    }
  return dx;
}

Tensor resize_bilinear(const Tensor& x, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw Error("resize to empty extent");
  if (x.shape().h == out_h && x.shape().w == out_w) return x;
  return resize_planes(x, out_h, out_w);
}

}  // namespace rwt::nn
