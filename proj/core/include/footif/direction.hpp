#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace footif {

/// Command-space axis order used throughout: x, y, yaw, pitch.
enum class Axis { X = 0, Y = 1, Yaw = 2, Pitch = 3 };

/// The 8 single-axis directions followed by the 12 diagonals.
enum class Direction {
  F, B, L, R, TU, TD, LT, RT,
  LF, RF, LB, RB,
  LTU, RTU, LTD, RTD,
  FTU, BTU, FTD, BTD,
};

inline constexpr std::array<Direction, 8> kSingleDirections = {
    Direction::F, Direction::B, Direction::L, Direction::R,
    Direction::TU, Direction::TD, Direction::LT, Direction::RT};

inline constexpr std::array<Direction, 12> kDiagonalDirections = {
    Direction::LF, Direction::RF, Direction::LB, Direction::RB,
    Direction::LTU, Direction::RTU, Direction::LTD, Direction::RTD,
    Direction::FTU, Direction::BTU, Direction::FTD, Direction::BTD};

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view text);
/// Throws Error(ParseError) for an unknown label.
Direction parse_direction_or_throw(std::string_view text);

bool is_diagonal(Direction d);

/// A signed command axis, e.g. F is (Y, +1) and TU is (Pitch, -1).
struct SignedAxis {
  Axis axis = Axis::X;
  int sign = 1;
  bool operator==(const SignedAxis&) const = default;
};

/// Throws Error(InvalidArgument) for a diagonal.
SignedAxis single_axis(Direction d);

/// The two single directions a diagonal combines, ordered by axis index.
/// Throws Error(NotDiagonal) for a single direction.
std::array<Direction, 2> diagonal_parts(Direction d);

/// Unit vector in (x, y, yaw, pitch) command space. Diagonals are the
/// normalized sum of their two parts.
Eigen::Vector4d direction_vector(Direction d);

}  // namespace footif
