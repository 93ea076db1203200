#pragma once

// Hand-rolled backends with trivially predictable dynamics, used to pin the
// sampler's update rules independent of the toy world.

#include <atomic>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "vmdiff/backend.hpp"

namespace mocks {

using vmdiff::ConditionBundle;
using vmdiff::Embedding;
using vmdiff::Latent;
using vmdiff::Output;

class ZeroFieldBackend : public vmdiff::VelocityBackend {
 public:
  explicit ZeroFieldBackend(std::size_t dim = 2) : dim_(dim) {}

  std::size_t latent_dim() const override { return dim_; }
  Latent velocity(const Latent& x, int, const ConditionBundle&, double) const override {
    return Latent(std::vector<double>(x.dim(), 0.0));
  }
  Output decode(const Latent& x0) const override { return Output{x0.values, {}}; }
  Embedding encode_image(const std::string&) const override {
    return Embedding(std::vector<double>(dim_, 1.0));
  }
  Embedding encode_prompt(const std::string&) const override {
    return Embedding(std::vector<double>(dim_, 1.0));
  }

 private:
  std::size_t dim_;
};

// v = guidance * c where c is a fixed per-call vector; constant in x, so
// denoise and invert steps cancel exactly over any segment.
class ConstantFieldBackend : public vmdiff::VelocityBackend {
 public:
  explicit ConstantFieldBackend(std::vector<double> c) : c_(std::move(c)) {}

  std::size_t latent_dim() const override { return c_.size(); }
  Latent velocity(const Latent&, int, const ConditionBundle&, double guidance) const override {
    std::vector<double> v(c_);
    for (double& x : v) x *= guidance;
    return Latent(std::move(v));
  }
  Output decode(const Latent& x0) const override { return Output{x0.values, {}}; }
  Embedding encode_image(const std::string&) const override {
    return Embedding(std::vector<double>(c_.size(), 1.0));
  }
  Embedding encode_prompt(const std::string&) const override {
    return Embedding(std::vector<double>(c_.size(), 1.0));
  }

 private:
  std::vector<double> c_;
};

// Condition-sensitive constant field: v = guidance * (w . z_cond) * ones.
// The SCat reading uses the raw sum of the scaled halves, so beta1 != beta2
// moves the field; a scalar-product readout keeps everything 1-D-simple.
class CondConstantBackend : public vmdiff::VelocityBackend {
 public:
  CondConstantBackend(std::size_t latent_dim, std::vector<double> w,
                      std::map<std::string, Embedding> concepts)
      : dim_(latent_dim), w_(std::move(w)), concepts_(std::move(concepts)) {}

  std::size_t latent_dim() const override { return dim_; }

  Latent velocity(const Latent&, int, const ConditionBundle& cond,
                  double guidance) const override {
    double c = 0.0;
    if (cond.is_scat()) {
      const auto& sc = cond.scat();
      for (std::size_t i = 0; i < w_.size(); ++i) {
        c += w_[i] * (sc.left.values[i] + sc.right.values[i]);
      }
    } else {
      for (std::size_t i = 0; i < w_.size(); ++i) c += w_[i] * cond.sinp().values[i];
    }
    return Latent(std::vector<double>(dim_, guidance * c));
  }

  Output decode(const Latent& x0) const override { return Output{x0.values, {}}; }

  Embedding encode_image(const std::string& id) const override { return concepts_.at(id); }
  Embedding encode_prompt(const std::string&) const override {
    return Embedding(std::vector<double>(w_.size(), 0.0));
  }

 private:
  std::size_t dim_;
  std::vector<double> w_;
  std::map<std::string, Embedding> concepts_;
};

// x-independent but sigma-dependent field; Euler integration of it carries a
// genuine discretization error, unlike the multiplicative affine field.
class SigmaFieldBackend : public vmdiff::VelocityBackend {
 public:
  SigmaFieldBackend(std::size_t dim, int t_max) : dim_(dim), t_max_(t_max) {}

  std::size_t latent_dim() const override { return dim_; }
  Latent velocity(const Latent&, int t, const ConditionBundle&, double) const override {
    const double sigma = static_cast<double>(t) / static_cast<double>(t_max_);
    return Latent(std::vector<double>(dim_, std::sin(3.0 * sigma)));
  }
  Output decode(const Latent& x0) const override { return Output{x0.values, {}}; }
  Embedding encode_image(const std::string&) const override {
    return Embedding(std::vector<double>(dim_, 1.0));
  }
  Embedding encode_prompt(const std::string&) const override {
    return Embedding(std::vector<double>(dim_, 1.0));
  }

 private:
  std::size_t dim_;
  int t_max_;
};

// Delegates to an inner backend but fails the first `failures` velocity
// calls, for exercising abort-and-continue paths.
class FlakyBackend : public vmdiff::VelocityBackend {
 public:
  FlakyBackend(const vmdiff::VelocityBackend& inner, int failures)
      : inner_(inner), remaining_(failures) {}

  std::size_t latent_dim() const override { return inner_.latent_dim(); }
  Latent velocity(const Latent& x, int t, const ConditionBundle& cond,
                  double guidance) const override {
    if (remaining_.fetch_sub(1) > 0) {
      throw vmdiff::BackendFailure("injected fault");
    }
    return inner_.velocity(x, t, cond, guidance);
  }
  Output decode(const Latent& x0) const override { return inner_.decode(x0); }
  Embedding encode_image(const std::string& id) const override { return inner_.encode_image(id); }
  Embedding encode_prompt(const std::string& t) const override { return inner_.encode_prompt(t); }

 private:
  const vmdiff::VelocityBackend& inner_;
  mutable std::atomic<int> remaining_;
};

}  // namespace mocks
