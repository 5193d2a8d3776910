// Copyright 2026 The Brightsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "brightsynth/nn/ops.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>

#include "brightsynth/errors.h"

namespace brightsynth::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::ArrayXd>;
using ConstVecMap = Eigen::Map<const Eigen::ArrayXd>;

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct ConvGeometry {
  int cin, h, w, k, stride, pad, ho, wo;
  int rows() const { return cin * k * k; }
  int cols() const { return ho * wo; }
};

void Im2Col(const double* x, const ConvGeometry& g, double* cols) {
  const int p = g.cols();
  for (int c = 0; c < g.cin; ++c) {
    const double* plane = x + static_cast<size_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        double* row = cols + static_cast<size_t>((c * g.k + ky) * g.k + kx) * p;
        // Output columns whose input column lies inside the image.
        const int shift = kx - g.pad;
        const int ox_lo = std::max(0, (-shift + g.stride - 1) / g.stride);
        const int ox_hi = std::min(g.wo, (g.w - shift + g.stride - 1) / g.stride);
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          double* out = row + static_cast<size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h || ox_lo >= ox_hi) {
            std::fill(out, out + g.wo, 0.0);
            continue;
          }
          const double* in = plane + static_cast<size_t>(iy) * g.w;
          std::fill(out, out + ox_lo, 0.0);
          if (g.stride == 1) {
            std::copy(in + ox_lo + shift, in + ox_hi + shift, out + ox_lo);
          } else {
            for (int ox = ox_lo; ox < ox_hi; ++ox) out[ox] = in[ox * g.stride + shift];
          }
          std::fill(out + ox_hi, out + g.wo, 0.0);
        }
      }
    }
  }
}

void Col2ImAdd(const double* cols, const ConvGeometry& g, double* dx) {
  const int p = g.cols();
  for (int c = 0; c < g.cin; ++c) {
    double* plane = dx + static_cast<size_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const double* row = cols + static_cast<size_t>((c * g.k + ky) * g.k + kx) * p;
        const int shift = kx - g.pad;
        const int ox_lo = std::max(0, (-shift + g.stride - 1) / g.stride);
        const int ox_hi = std::min(g.wo, (g.w - shift + g.stride - 1) / g.stride);
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= g.h) continue;
          double* out = plane + static_cast<size_t>(iy) * g.w;
          const double* in = row + static_cast<size_t>(oy) * g.wo;
          for (int ox = ox_lo; ox < ox_hi; ++ox) out[ox * g.stride + shift] += in[ox];
        }
      }
    }
  }
}

}  // namespace

Var Conv2d(Tape& tape, Var x, Var weight, Var bias, int stride) {
  const Tensor& xv = tape.value(x);
  const Tensor& wv = tape.value(weight);
  const Tensor& bv = tape.value(bias);
  const int cout = wv.shape.n;
  const int k = wv.shape.h;
  if (wv.shape.c != xv.shape.c || wv.shape.w != k || k % 2 == 0) {
    throw ShapeError("conv weight " + wv.shape.str() + " does not fit input " +
                     xv.shape.str());
  }
  if (bv.size() != static_cast<size_t>(cout)) throw ShapeError("conv bias size");
  if (stride < 1) throw ConfigError("conv stride must be >= 1");
  ConvGeometry g{xv.shape.c, xv.shape.h, xv.shape.w, k, stride, k / 2, 0, 0};
  g.ho = (g.h + 2 * g.pad - k) / stride + 1;
  g.wo = (g.w + 2 * g.pad - k) / stride + 1;
  const int n = xv.shape.n;
  const bool pointwise = (k == 1 && stride == 1);
  const size_t col_size = static_cast<size_t>(g.rows()) * g.cols();

  auto cols = std::make_shared<Buffer>();
  if (!pointwise) cols->resize(col_size * n);

  Tensor out(Shape{n, cout, g.ho, g.wo});
  ConstMatMap wmat(wv.data.data(), cout, g.rows());
  for (int i = 0; i < n; ++i) {
    const double* src;
    if (pointwise) {
      src = xv.plane(i, 0);
    } else {
      Im2Col(xv.plane(i, 0), g, cols->data() + col_size * i);
      src = cols->data() + col_size * i;
    }
    ConstMatMap cmat(src, g.rows(), g.cols());
    MatMap omat(out.plane(i, 0), cout, g.cols());
    omat.noalias() = wmat * cmat;
    for (int o = 0; o < cout; ++o) omat.row(o).array() += bv.data[o];
  }

  return tape.Record(std::move(out), {x, weight, bias},
                     [x, weight, bias, g, n, cout, pointwise, col_size, cols](Tape& t, int self) {
    const Tensor& dout = t.GradRef(Var{self});
    const Tensor& wv = t.value(weight);
    ConstMatMap wmat(wv.data.data(), cout, g.rows());
    const bool need_w = t.requires_grad(weight);
    const bool need_b = t.requires_grad(bias);
    const bool need_x = t.requires_grad(x);
    Buffer dcols(need_x && !pointwise ? col_size : 0);
    for (int i = 0; i < n; ++i) {
      ConstMatMap dmat(dout.plane(i, 0), cout, g.cols());
      const double* src = pointwise ? t.value(x).plane(i, 0)
                                    : cols->data() + col_size * i;
      ConstMatMap cmat(src, g.rows(), g.cols());
      if (need_w) {
        MatMap dw(t.GradRef(weight).data.data(), cout, g.rows());
        dw.noalias() += dmat * cmat.transpose();
      }
      if (need_b) {
        Tensor& db = t.GradRef(bias);
        for (int o = 0; o < cout; ++o) db.data[o] += dmat.row(o).sum();
      }
      if (need_x) {
        Tensor& dx = t.GradRef(x);
        if (pointwise) {
          MatMap dxm(dx.plane(i, 0), g.rows(), g.cols());
          dxm.noalias() += wmat.transpose() * dmat;
        } else {
          MatMap dcm(dcols.data(), g.rows(), g.cols());
          dcm.noalias() = wmat.transpose() * dmat;
          Col2ImAdd(dcols.data(), g, dx.plane(i, 0));
        }
      }
    }
  });
}

Var Add(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  CheckSameShape(av, bv, "add");
  Tensor out = av;
  for (size_t k = 0; k < out.size(); ++k) out.data[k] += bv.data[k];
  return tape.Record(std::move(out), {a, b}, [a, b](Tape& t, int self) {
    const Tensor& g = t.GradRef(Var{self});
    for (Var in : {a, b}) {
      if (!t.requires_grad(in)) continue;
      Tensor& d = t.GradRef(in);
      for (size_t k = 0; k < d.size(); ++k) d.data[k] += g.data[k];
    }
  });
}

Var AddChannelBias(Tape& tape, Var x, Var v) {
  const Tensor& xv = tape.value(x);
  const Tensor& vv = tape.value(v);
  if (vv.shape.n != xv.shape.n || vv.shape.c != xv.shape.c || vv.shape.plane() != 1) {
    throw ShapeError("channel bias " + vv.shape.str() + " vs " + xv.shape.str());
  }
  Tensor out = xv;
  const size_t plane = xv.shape.plane();
  for (int n = 0; n < xv.shape.n; ++n) {
    for (int c = 0; c < xv.shape.c; ++c) {
      double* p = out.plane(n, c);
      const double b = vv.at(n, c, 0, 0);
      for (size_t k = 0; k < plane; ++k) p[k] += b;
    }
  }
  return tape.Record(std::move(out), {x, v}, [x, v](Tape& t, int self) {
    const Tensor& g = t.GradRef(Var{self});
    const size_t plane = g.shape.plane();
    if (t.requires_grad(x)) {
      Tensor& dx = t.GradRef(x);
      for (size_t k = 0; k < dx.size(); ++k) dx.data[k] += g.data[k];
    }
    if (t.requires_grad(v)) {
      Tensor& dv = t.GradRef(v);
      for (int n = 0; n < g.shape.n; ++n) {
        for (int c = 0; c < g.shape.c; ++c) {
          const double* p = g.plane(n, c);
          double s = 0.0;
          for (size_t k = 0; k < plane; ++k) s += p[k];
          dv.at(n, c, 0, 0) += s;
        }
      }
    }
  });
}

Var ScaleShift(Tape& tape, Var x, Var scale, Var shift) {
  const Tensor& xv = tape.value(x);
  const Tensor& sv = tape.value(scale);
  const Tensor& tv = tape.value(shift);
  const int channels = xv.shape.c;
  if (sv.size() != static_cast<size_t>(channels) || tv.size() != sv.size()) {
    throw ShapeError("scale/shift size does not match channels");
  }
  Tensor out(xv.shape);
  const size_t plane = xv.shape.plane();
  for (int n = 0; n < xv.shape.n; ++n) {
    for (int c = 0; c < channels; ++c) {
      const double* in = xv.plane(n, c);
      double* o = out.plane(n, c);
      for (size_t k = 0; k < plane; ++k) o[k] = in[k] * sv.data[c] + tv.data[c];
    }
  }
  return tape.Record(std::move(out), {x, scale, shift},
                     [x, scale, shift](Tape& t, int self) {
    const Tensor& g = t.GradRef(Var{self});
    const Tensor& xv = t.value(x);
    const Tensor& sv = t.value(scale);
    const size_t plane = g.shape.plane();
    for (int n = 0; n < g.shape.n; ++n) {
      for (int c = 0; c < g.shape.c; ++c) {
        const double* gp = g.plane(n, c);
        const double* xp = xv.plane(n, c);
        if (t.requires_grad(x)) {
          double* dx = t.GradRef(x).plane(n, c);
          for (size_t k = 0; k < plane; ++k) dx[k] += gp[k] * sv.data[c];
        }
        if (t.requires_grad(scale) || t.requires_grad(shift)) {
          double gs = 0.0, gt = 0.0;
          for (size_t k = 0; k < plane; ++k) {
            gs += gp[k] * xp[k];
            gt += gp[k];
          }
          if (t.requires_grad(scale)) t.GradRef(scale).data[c] += gs;
          if (t.requires_grad(shift)) t.GradRef(shift).data[c] += gt;
        }
      }
    }
  });
}

Var Silu(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  auto sig = std::make_shared<Buffer>(xv.size());
  ConstVecMap xa(xv.data.data(), xv.size());
  VecMap sa(sig->data(), sig->size());
  sa = 1.0 / (1.0 + (-xa).exp());
  Tensor out(xv.shape);
  VecMap(out.data.data(), out.size()) = xa * sa;
  return tape.Record(std::move(out), {x}, [x, sig](Tape& t, int self) {
    const Tensor& g = t.GradRef(Var{self});
    const Tensor& xv = t.value(x);
    Tensor& dx = t.GradRef(x);
    ConstVecMap sa(sig->data(), sig->size());
    ConstVecMap xa(xv.data.data(), xv.size());
    VecMap(dx.data.data(), dx.size()) +=
        ConstVecMap(g.data.data(), g.size()) * sa * (1.0 + xa * (1.0 - sa));
  });
}

Var Sigmoid(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  Tensor out(xv.shape);
  VecMap(out.data.data(), out.size()) =
      1.0 / (1.0 + (-ConstVecMap(xv.data.data(), xv.size())).exp());
  return tape.Record(std::move(out), {x}, [x](Tape& t, int self) {
    const Tensor& g = t.GradRef(Var{self});
    const Tensor& y = t.value(Var{self});
    Tensor& dx = t.GradRef(x);
    for (size_t k = 0; k < dx.size(); ++k) {
      dx.data[k] += g.data[k] * y.data[k] * (1.0 - y.data[k]);
    }
  });
}

Var Upsample2(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  const Shape s = xv.shape;
  Tensor out(Shape{s.n, s.c, 2 * s.h, 2 * s.w});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < 2 * s.h; ++y) {
        for (int xx = 0; xx < 2 * s.w; ++xx) {
          out.at(n, c, y, xx) = xv.at(n, c, y / 2, xx / 2);
        }
      }
    }
  }
  return tape.Record(std::move(out), {x}, [x](Tape& t, int self) {
    const Tensor& g = t.GradRef(Var{self});
    Tensor& dx = t.GradRef(x);
    const Shape s = dx.shape;
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        for (int y = 0; y < 2 * s.h; ++y) {
          for (int xx = 0; xx < 2 * s.w; ++xx) {
            dx.at(n, c, y / 2, xx / 2) += g.at(n, c, y, xx);
          }
        }
      }
    }
  });
}

Var Concat(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  if (av.shape.n != bv.shape.n || av.shape.h != bv.shape.h || av.shape.w != bv.shape.w) {
    throw ShapeError("concat " + av.shape.str() + " with " + bv.shape.str());
  }
  const int ca = av.shape.c;
  const int cb = bv.shape.c;
  Tensor out(Shape{av.shape.n, ca + cb, av.shape.h, av.shape.w});
  const size_t plane = av.shape.plane();
  for (int n = 0; n < av.shape.n; ++n) {
    std::copy(av.plane(n, 0), av.plane(n, 0) + plane * ca, out.plane(n, 0));
    std::copy(bv.plane(n, 0), bv.plane(n, 0) + plane * cb, out.plane(n, ca));
  }
  return tape.Record(std::move(out), {a, b}, [a, b, ca, cb](Tape& t, int self) {
    const Tensor& g = t.GradRef(Var{self});
    const size_t plane = g.shape.plane();
    for (int n = 0; n < g.shape.n; ++n) {
      if (t.requires_grad(a)) {
        double* d = t.GradRef(a).plane(n, 0);
        const double* s = g.plane(n, 0);
        for (size_t k = 0; k < plane * ca; ++k) d[k] += s[k];
      }
      if (t.requires_grad(b)) {
        double* d = t.GradRef(b).plane(n, 0);
        const double* s = g.plane(n, ca);
        for (size_t k = 0; k < plane * cb; ++k) d[k] += s[k];
      }
    }
  });
}

Var Linear(Tape& tape, Var x, Var weight, Var bias) {
  const Tensor& xv = tape.value(x);
  const Tensor& wv = tape.value(weight);
  const Tensor& bv = tape.value(bias);
  const int n = xv.shape.n;
  const int f = static_cast<int>(xv.size() / std::max(1, n));
  const int o = wv.shape.n;
  if (static_cast<size_t>(o) * f != wv.size() || bv.size() != static_cast<size_t>(o)) {
    throw ShapeError("linear weight " + wv.shape.str() + " vs input " + xv.shape.str());
  }
  Tensor out(Shape{n, o, 1, 1});
  ConstMatMap xm(xv.data.data(), n, f);
  ConstMatMap wm(wv.data.data(), o, f);
  MatMap om(out.data.data(), n, o);
  om.noalias() = xm * wm.transpose();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < o; ++j) om(i, j) += bv.data[j];
  }
  return tape.Record(std::move(out), {x, weight, bias},
                     [x, weight, bias, n, f, o](Tape& t, int self) {
    ConstMatMap gm(t.GradRef(Var{self}).data.data(), n, o);
    if (t.requires_grad(weight)) {
      MatMap dw(t.GradRef(weight).data.data(), o, f);
      dw.noalias() += gm.transpose() * ConstMatMap(t.value(x).data.data(), n, f);
    }
    if (t.requires_grad(bias)) {
      Tensor& db = t.GradRef(bias);
      for (int j = 0; j < o; ++j) db.data[j] += gm.col(j).sum();
    }
    if (t.requires_grad(x)) {
      MatMap dx(t.GradRef(x).data.data(), n, f);
      dx.noalias() += gm * ConstMatMap(t.value(weight).data.data(), o, f);
    }
  });
}

Var Scale(Tape& tape, Var x, double factor) {
  Tensor out = tape.value(x);
  for (double& v : out.data) v *= factor;
  return tape.Record(std::move(out), {x}, [x, factor](Tape& t, int self) {
    const Tensor& g = t.GradRef(Var{self});
    Tensor& dx = t.GradRef(x);
    for (size_t k = 0; k < dx.size(); ++k) dx.data[k] += factor * g.data[k];
  });
}

Var MseLoss(Tape& tape, Var pred, Var target) {
  const Tensor& pv = tape.value(pred);
  const Tensor& tv = tape.value(target);
  CheckSameShape(pv, tv, "mse");
  double sum = 0.0;
  for (size_t k = 0; k < pv.size(); ++k) {
    const double d = pv.data[k] - tv.data[k];
    sum += d * d;
  }
  const double count = static_cast<double>(pv.size());
  Tensor out(Shape{1, 1, 1, 1}, sum / count);
  return tape.Record(std::move(out), {pred, target},
                     [pred, target, count](Tape& t, int self) {
    const double g = t.GradRef(Var{self}).data[0];
    const Tensor& pv = t.value(pred);
    const Tensor& tv = t.value(target);
    const double scale = 2.0 * g / count;
    if (t.requires_grad(pred)) {
      Tensor& d = t.GradRef(pred);
      for (size_t k = 0; k < d.size(); ++k) d.data[k] += scale * (pv.data[k] - tv.data[k]);
    }
    if (t.requires_grad(target)) {
      Tensor& d = t.GradRef(target);
      for (size_t k = 0; k < d.size(); ++k) d.data[k] -= scale * (pv.data[k] - tv.data[k]);
    }
  });
}

Var FocalLoss(Tape& tape, Var logits, const Tensor& target, double normalizer) {
  const Tensor& zv = tape.value(logits);
  CheckSameShape(zv, target, "focal loss target");
  if (!(normalizer > 0)) throw ConfigError("focal loss normalizer must be > 0");
  auto grad = std::make_shared<Buffer>(zv.size());
  double sum = 0.0;
  for (size_t k = 0; k < zv.size(); ++k) {
    const double z = zv.data[k];
    const double p = Sigmoid(z);
    const double q = 1.0 - p;
    const double log_p = -Softplus(-z);
    const double log_q = -Softplus(z);
    if (target.data[k] >= 1.0) {
      sum += -q * q * log_p;
      (*grad)[k] = 2.0 * p * q * q * log_p - q * q * q;
    } else {
      const double w = std::pow(1.0 - target.data[k], 4);
      sum += -w * p * p * log_q;
      (*grad)[k] = w * p * p * (p - 2.0 * q * log_q);
    }
  }
  Tensor out(Shape{1, 1, 1, 1}, sum / normalizer);
  return tape.Record(std::move(out), {logits},
                     [logits, grad, normalizer](Tape& t, int self) {
    const double g = t.GradRef(Var{self}).data[0] / normalizer;
    Tensor& d = t.GradRef(logits);
    for (size_t k = 0; k < d.size(); ++k) d.data[k] += g * (*grad)[k];
  });
}

Var MaskedL1(Tape& tape, Var pred, const Tensor& target, const Tensor& mask,
             double normalizer) {
  const Tensor& pv = tape.value(pred);
  CheckSameShape(pv, target, "masked L1 target");
  if (mask.shape.n != pv.shape.n || mask.shape.c != 1 ||
      mask.shape.h != pv.shape.h || mask.shape.w != pv.shape.w) {
    throw ShapeError("masked L1 mask " + mask.shape.str());
  }
  if (!(normalizer > 0)) throw ConfigError("L1 normalizer must be > 0");
  auto sign = std::make_shared<Buffer>(pv.size(), 0.0);
  double sum = 0.0;
  const size_t plane = pv.shape.plane();
  for (int n = 0; n < pv.shape.n; ++n) {
    const double* m = mask.plane(n, 0);
    for (int c = 0; c < pv.shape.c; ++c) {
      const size_t base = (static_cast<size_t>(n) * pv.shape.c + c) * plane;
      for (size_t k = 0; k < plane; ++k) {
        if (m[k] == 0.0) continue;
        const double d = pv.data[base + k] - target.data[base + k];
        sum += m[k] * std::abs(d);
        (*sign)[base + k] = m[k] * ((d > 0) - (d < 0));
      }
    }
  }
  Tensor out(Shape{1, 1, 1, 1}, sum / normalizer);
  return tape.Record(std::move(out), {pred}, [pred, sign, normalizer](Tape& t, int self) {
    const double g = t.GradRef(Var{self}).data[0] / normalizer;
    Tensor& d = t.GradRef(pred);
    for (size_t k = 0; k < d.size(); ++k) d.data[k] += g * (*sign)[k];
  });
}

}  // namespace brightsynth::nn
