#include "twlp/corpus.hpp"

namespace twlp {

std::string CorpusEntry::name() const {
  std::string s = to_string(kind) + "-" + std::to_string(size);
  if (width > 0) s += "w" + std::to_string(width);
  return s + "-s" + std::to_string(seed);
}

std::vector<CorpusEntry> builtin_corpus() {
  std::vector<CorpusEntry> c;
  unsigned long long seed = 1;
  for (int n : {4, 8, 16, 32, 64, 128, 256}) c.push_back({InstanceKind::PathFlow, n, seed++, 0});
  for (int n : {3, 4, 6, 8, 12, 20}) c.push_back({InstanceKind::GridFlow, n, seed++, 0});
  c.push_back({InstanceKind::GridFlow, 8, seed++, 6});
  c.push_back({InstanceKind::GridFlow, 6, seed++, 2});
  for (int w : {1, 2, 3, 4, 5, 6, 8, 10})
    for (int n : {16, 40}) c.push_back({InstanceKind::RandomTw, n + w, seed++, w});
  c.push_back({InstanceKind::RandomTw, 100, seed++, 3});
  c.push_back({InstanceKind::RandomTw, 80, seed++, 6});
  return c;
}

}  // namespace twlp
