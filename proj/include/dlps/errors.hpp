#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dlps {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A map was evaluated outside its declared domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, int iterations, double residual_norm)
      : Error(what), iterations_(iterations), residual_norm_(residual_norm) {}
  int iterations() const { return iterations_; }
  double residual_norm() const { return residual_norm_; }

 private:
  int iterations_;
  double residual_norm_;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

/// A numerically checked identity failed; carries the identity name and the worst sample.
class ValidationError : public Error {
 public:
  ValidationError(std::string identity, double violation, Eigen::VectorXd sample = {})
      : Error(identity + " violated by " + std::to_string(violation)),
        identity_(std::move(identity)),
        violation_(violation),
        sample_(std::move(sample)) {}
  const std::string& identity() const { return identity_; }
  double violation() const { return violation_; }
  const Eigen::VectorXd& sample() const { return sample_; }

 private:
  std::string identity_;
  double violation_;
  Eigen::VectorXd sample_;
};

/// No group element maps one base point onto another.
class MatchingError : public Error {
 public:
  using Error::Error;
};

/// Mixed partial matrix of a discrete Lagrangian is (numerically) singular.
class RegularityError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlps
