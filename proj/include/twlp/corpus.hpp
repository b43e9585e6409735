#pragma once

#include <string>
#include <vector>

#include "twlp/lp.hpp"

namespace twlp {

struct CorpusEntry {
  InstanceKind kind;
  int size = 0;
  unsigned long long seed = 0;
  int width = 0;  // 0: generator default

  std::string name() const;
  Instance generate() const { return generate_instance(kind, size, seed, width); }
};

// Fixed mix of path, grid and random partial k-tree instances, up to about
// 500 columns and treewidth 10.
std::vector<CorpusEntry> builtin_corpus();

}  // namespace twlp
