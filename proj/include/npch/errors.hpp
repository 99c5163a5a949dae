#pragma once

#include <any>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace npch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point does not belong to the space it was handed to.
class InvalidPoint : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedSpace : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<double> t, std::vector<double> values)
      : Error(what), t_(std::move(t)), values_(std::move(values)) {}
  const std::vector<double>& t() const { return t_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> t_;
  std::vector<double> values_;
};

// Carries whatever diagnostic series the failing iteration produced, and
// optionally the last iterate (e.g. a CylinderSection<G>).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history, std::any last_iterate = {})
      : Error(what), history_(std::move(history)), last_(std::move(last_iterate)) {}
  const std::vector<double>& history() const { return history_; }
  const std::any& last_iterate() const { return last_; }

 private:
  std::vector<double> history_;
  std::any last_;
};

class UsageError : public Error {
 public:
  UsageError(const std::string& what, std::string token)
      : Error(token.empty() ? what : what + ": " + token), token_(std::move(token)) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path) : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace npch
