#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pixsteg/image.hpp"

namespace pixsteg {

struct CorpusPair {
  std::string name;
  Image cover;
  Image secret;
};

enum class CorpusStyle {
  kNatural,   // smooth gradients, soft blobs and a few hard-edged shapes
  kEdgeRich,  // stripes, checker patches and many shapes
};

// Synthetic grayscale generators for desk-scale experiments.
Image synth_natural(int size, std::mt19937_64& rng);
Image synth_edge_rich(int size, std::mt19937_64& rng);
// Two flat regions split by a straight step edge at a random position/orientation.
Image synth_step(int size, std::mt19937_64& rng);

std::vector<Image> synth_images(int count, int size, std::uint64_t seed, CorpusStyle style);
std::vector<CorpusPair> synth_corpus(int count, int size, std::uint64_t seed, CorpusStyle style);

// Directory layout: <name>.cover.pgm and <name>.secret.pgm, one pair per name.
void write_corpus(const std::vector<CorpusPair>& pairs, const std::filesystem::path& dir);
// Pairs sorted by name. Covers without a matching secret are a DataError.
std::vector<CorpusPair> read_corpus(const std::filesystem::path& dir);

}  // namespace pixsteg
