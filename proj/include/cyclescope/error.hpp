#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cyclescope {

enum class Errc {
  SelfLoop,
  IndexOutOfRange,
  DanglingVertex,
  NotStronglyConnected,
  TooLarge,
  NoConvergence,
  AmbiguousTarget,
  MissingSide,
  EmptyEmbedding,
  DimensionMismatch,
  DegreeTooSmall,
  MissingGroundTruth,
  UnknownSpec,
  IoError,
  ParseError,
  VertexMapMismatch,
  InvalidArgument,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::DanglingVertex: return "DanglingVertex";
    case Errc::NotStronglyConnected: return "NotStronglyConnected";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::AmbiguousTarget: return "AmbiguousTarget";
    case Errc::MissingSide: return "MissingSide";
    case Errc::EmptyEmbedding: return "EmptyEmbedding";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DegreeTooSmall: return "DegreeTooSmall";
    case Errc::MissingGroundTruth: return "MissingGroundTruth";
    case Errc::UnknownSpec: return "UnknownSpec";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
    case Errc::VertexMapMismatch: return "VertexMapMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised for errors that concern one specific vertex (SelfLoop, DanglingVertex).
class VertexError : public Error {
 public:
  VertexError(Errc code, std::size_t vertex, const std::string& what)
      : Error(code, what), vertex_(vertex) {}

  std::size_t vertex() const noexcept { return vertex_; }

 private:
  std::size_t vertex_;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(double best_residual, const std::string& what)
      : Error(Errc::NoConvergence, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace cyclescope
