#pragma once

// Query sets handed to a conditional-sampling oracle. Symbols are 1-based:
// the domain of a distribution on n symbols is {1, ..., n}. A QuerySet is a
// nonempty strictly increasing list of symbols; bounds against a concrete
// domain are checked where the domain size is known (session registration,
// conditioning).

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "anaconda/rng.hpp"

namespace anaconda {

using symbol_t = std::uint32_t;

struct SymbolValue {
  symbol_t index;
  double value;
};

class QuerySet {
 public:
  explicit QuerySet(std::vector<symbol_t> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw error("QuerySet: empty set");
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i] < 1) throw error("QuerySet: symbols are 1-based");
      if (i > 0 && symbols_[i] <= symbols_[i - 1])
        throw error("QuerySet: symbols must be strictly increasing");
    }
  }

  QuerySet(std::initializer_list<symbol_t> symbols)
      : QuerySet(std::vector<symbol_t>(symbols)) {}

  static QuerySet from_unsorted(std::vector<symbol_t> symbols) {
    std::sort(symbols.begin(), symbols.end());
    symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
    return QuerySet(std::move(symbols));
  }

  std::size_t size() const { return symbols_.size(); }
  symbol_t operator[](std::size_t pos) const { return symbols_[pos]; }
  symbol_t max_symbol() const { return symbols_.back(); }

  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }
  const std::vector<symbol_t>& symbols() const { return symbols_; }

  bool contains(symbol_t s) const {
    return std::binary_search(symbols_.begin(), symbols_.end(), s);
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t position_of(symbol_t s) const {
    auto it = std::lower_bound(symbols_.begin(), symbols_.end(), s);
    if (it == symbols_.end() || *it != s) return npos;
    return static_cast<std::size_t>(it - symbols_.begin());
  }

  void check_within(symbol_t n, const std::string& context) const {
    if (max_symbol() > n)
      throw error(context + ": query set symbol " + std::to_string(max_symbol()) +
                  " exceeds domain size " + std::to_string(n));
  }

  bool operator==(const QuerySet& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<symbol_t> symbols_;
};

}  // namespace anaconda
