#pragma once

// Malformed archive texts and the line each one must be rejected on.

#include <string>
#include <vector>

namespace fixture {

struct Malformed {
  std::string name;
  std::string text;
  std::size_t line;
};

inline std::string codes(int n, char c = '0') {
  std::string s;
  for (int i = 0; i < n; ++i) {
    s += ' ';
    s += c;
  }
  return s;
}

inline std::string meta_row(const std::string& id, const std::string& tail = codes(32)) {
  return id + " whorl 41 12 0110101010" + tail + "\n";
}

inline std::vector<Malformed> malformed_meta() {
  const std::string head = "RFPMETA 1\n";
  return {
      {"empty file", "", 1},
      {"bad header", "RFPMETA 2\n" + meta_row("a"), 1},
      {"31 codes", head + meta_row("a") + meta_row("b", codes(31)), 3},
      {"33 codes", head + meta_row("a", codes(33)), 2},
      {"code out of range", head + meta_row("a") + meta_row("b", codes(31) + " 8"), 3},
      {"negative code", head + meta_row("a", codes(31) + " -1"), 2},
      {"short delta", head + "a whorl 41 12 011010101" + codes(32) + "\n", 2},
      {"non-binary delta", head + "a whorl 41 12 01101010x0" + codes(32) + "\n", 2},
      {"unknown class", head + "a loopy 41 12 0110101010" + codes(32) + "\n", 2},
      {"negative alpha", head + "a whorl -4 12 0110101010" + codes(32) + "\n", 2},
      {"text beta", head + "a whorl 4 many 0110101010" + codes(32) + "\n", 2},
      {"duplicate id", head + meta_row("a") + meta_row("b") + meta_row("a"), 4},
      {"blank line", head + meta_row("a") + "\n" + meta_row("b"), 3},
  };
}

inline std::vector<Malformed> malformed_clusters() {
  const std::string head = "RFPCLUSTERS 1\n";
  return {
      {"empty file", "", 1},
      {"bad header", "RFPCLUSTER 1\nC 1 a\n", 1},
      {"unknown tag", head + "C 1 a b\nX 2\n", 3},
      {"cluster without members", head + "C 1\n", 2},
      {"cluster id zero", head + "C 0 a\n", 2},
      {"cluster listed twice", head + "C 1 a\nC 1 b\n", 3},
      {"record listed twice", head + "C 1 a b\nO a\n", 3},
      {"cluster gap", head + "C 1 a\nC 3 b\n", 3},
      {"outlier with two ids", head + "C 1 a\nO b c\n", 3},
      {"merge arity", head + "C 1 a b\nM 0 1 2\n", 3},
      {"merge score text", head + "C 1 a b\nM 0 1 2 high\n", 3},
      {"merge wrong node", head + "C 1 a b\nM 0 1 5 0.5\n", 3},
      {"merge reuses node", head + "C 1 a b c\nM 0 1 3 0.5\nM 0 2 4 0.25\n", 4},
      {"blank line", head + "C 1 a b\n\nM 0 1 2 0.5\n", 3},
  };
}

}  // namespace fixture
