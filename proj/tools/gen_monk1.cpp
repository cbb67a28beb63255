// Regenerates data/monk1.csv: a deterministic 124-row sample of the
// classic six-attribute concept  (a1 == a2) or (a5 == 1),  one-hot encoded
// into 15 binary columns. The full space has 3*3*2*3*4*2 = 432 points, half
// of them positive; a fixed-seed shuffle picks 62 of each class, and rows
// keep their enumeration order so the file is stable across runs.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "booltree/core.hpp"

namespace {

struct Point {
  int a[6];  // a1..a6, values starting at 1
};

constexpr int kCard[6] = {3, 3, 2, 3, 4, 2};

bool positive(const Point& p) { return p.a[0] == p.a[1] || p.a[4] == 1; }

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : "data/monk1.csv";

  std::vector<Point> space;
  Point p{};
  for (p.a[0] = 1; p.a[0] <= kCard[0]; ++p.a[0])
    for (p.a[1] = 1; p.a[1] <= kCard[1]; ++p.a[1])
      for (p.a[2] = 1; p.a[2] <= kCard[2]; ++p.a[2])
        for (p.a[3] = 1; p.a[3] <= kCard[3]; ++p.a[3])
          for (p.a[4] = 1; p.a[4] <= kCard[4]; ++p.a[4])
            for (p.a[5] = 1; p.a[5] <= kCard[5]; ++p.a[5]) space.push_back(p);

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < space.size(); ++i)
    (positive(space[i]) ? pos : neg).push_back(i);

  booltree::SplitRng rng(1);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::size_t> rows(pos.begin(), pos.begin() + 62);
  rows.insert(rows.end(), neg.begin(), neg.begin() + 62);
  std::sort(rows.begin(), rows.end());

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }
  // One column per attribute value, except the last value of each attribute
  // with two values (it is the complement of the first). That keeps binary
  // attributes single-column: 3+3+1+3+4+1 = 15 features.
  for (int a = 0; a < 6; ++a) {
    const int cols = kCard[a] == 2 ? 1 : kCard[a];
    for (int v = 1; v <= cols; ++v) out << 'a' << (a + 1) << '_' << v << ',';
  }
  out << "class\n";
  for (std::size_t r : rows) {
    const Point& q = space[r];
    for (int a = 0; a < 6; ++a) {
      const int cols = kCard[a] == 2 ? 1 : kCard[a];
      for (int v = 1; v <= cols; ++v) out << (q.a[a] == v ? 1 : 0) << ',';
    }
    out << (positive(q) ? 1 : 0) << '\n';
  }
  std::cerr << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return 0;
}
