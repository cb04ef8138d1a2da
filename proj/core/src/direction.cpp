#include "footif/direction.hpp"

#include <string>

#include "footif/error.hpp"

namespace footif {
namespace {

constexpr std::array<std::string_view, 20> kNames = {
    "F", "B", "L", "R", "TU", "TD", "LT", "RT",
    "LF", "RF", "LB", "RB",
    "LTU", "RTU", "LTD", "RTD",
    "FTU", "BTU", "FTD", "BTD"};

}  // namespace

std::string_view to_string(Direction d) { return kNames[static_cast<std::size_t>(d)]; }

std::optional<Direction> parse_direction(std::string_view text) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == text) return static_cast<Direction>(i);
  }
  return std::nullopt;
}

Direction parse_direction_or_throw(std::string_view text) {
  if (auto d = parse_direction(text)) return *d;
  throw Error(ErrorCode::ParseError, "unknown direction label '" + std::string(text) + "'");
}

bool is_diagonal(Direction d) { return static_cast<int>(d) >= static_cast<int>(Direction::LF); }

SignedAxis single_axis(Direction d) {
  switch (d) {
    case Direction::F: return {Axis::Y, 1};
    case Direction::B: return {Axis::Y, -1};
    case Direction::L: return {Axis::X, -1};
    case Direction::R: return {Axis::X, 1};
    case Direction::TU: return {Axis::Pitch, -1};
    case Direction::TD: return {Axis::Pitch, 1};
    case Direction::LT: return {Axis::Yaw, 1};
    case Direction::RT: return {Axis::Yaw, -1};
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument,
              "direction " + std::string(to_string(d)) + " is not a single-axis direction");
}

std::array<Direction, 2> diagonal_parts(Direction d) {
  using D = Direction;
  switch (d) {
    case D::LF: return {D::L, D::F};
    case D::RF: return {D::R, D::F};
    case D::LB: return {D::L, D::B};
    case D::RB: return {D::R, D::B};
    case D::LTU: return {D::L, D::TU};
    case D::RTU: return {D::R, D::TU};
    case D::LTD: return {D::L, D::TD};
    case D::RTD: return {D::R, D::TD};
    case D::FTU: return {D::F, D::TU};
    case D::BTU: return {D::B, D::TU};
    case D::FTD: return {D::F, D::TD};
    case D::BTD: return {D::B, D::TD};
    default: break;
  }
  throw Error(ErrorCode::NotDiagonal, std::string(to_string(d)) + " is not a diagonal direction");
}

Eigen::Vector4d direction_vector(Direction d) {
  Eigen::Vector4d v = Eigen::Vector4d::Zero();
  if (!is_diagonal(d)) {
    const SignedAxis a = single_axis(d);
    v[static_cast<int>(a.axis)] = a.sign;
    return v;
  }
  for (Direction part : diagonal_parts(d)) {
    const SignedAxis a = single_axis(part);
    v[static_cast<int>(a.axis)] = a.sign;
  }
  return v.normalized();
}

}  // namespace footif
