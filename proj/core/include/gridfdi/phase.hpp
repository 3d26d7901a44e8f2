#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace gridfdi {

enum class Phase : std::uint8_t { a = 0, b = 1, c = 2 };

inline constexpr std::array<Phase, 3> all_phases{Phase::a, Phase::b, Phase::c};

char phase_letter(Phase p);

/// Throws std::invalid_argument for anything but 'a', 'b', 'c'.
Phase phase_from_letter(char ch);

/// Non-empty subset of {a, b, c}, canonically ordered a < b < c.
class PhaseSet {
public:
  PhaseSet() = default;

  static PhaseSet abc() { return PhaseSet{0b111}; }
  static PhaseSet of(Phase p) { return PhaseSet{static_cast<std::uint8_t>(1u << static_cast<int>(p))}; }

  /// Parses strings like "a", "bc", "abc"; throws std::invalid_argument on
  /// unknown letters, duplicates, or non-canonical order.
  static PhaseSet parse(const std::string& text);

  void insert(Phase p) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<int>(p)); }
  bool contains(Phase p) const { return (bits_ >> static_cast<int>(p)) & 1u; }
  bool contains(const PhaseSet& other) const { return (bits_ & other.bits_) == other.bits_; }
  PhaseSet intersect(const PhaseSet& other) const { return PhaseSet{static_cast<std::uint8_t>(bits_ & other.bits_)}; }
  PhaseSet unite(const PhaseSet& other) const { return PhaseSet{static_cast<std::uint8_t>(bits_ | other.bits_)}; }
  bool empty() const { return bits_ == 0; }
  int size() const;
  std::string to_string() const;

  bool operator==(const PhaseSet&) const = default;

  class Iterator {
  public:
    Iterator(std::uint8_t bits, int pos) : bits_(bits), pos_(pos) { advance(); }
    Phase operator*() const { return static_cast<Phase>(pos_); }
    Iterator& operator++() { ++pos_; advance(); return *this; }
    bool operator!=(const Iterator& other) const { return pos_ != other.pos_; }

  private:
    void advance() { while (pos_ < 3 && !((bits_ >> pos_) & 1u)) ++pos_; }
    std::uint8_t bits_;
    int pos_;
  };

  Iterator begin() const { return Iterator{bits_, 0}; }
  Iterator end() const { return Iterator{bits_, 3}; }

private:
  explicit PhaseSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_ = 0;
};

}  // namespace gridfdi
