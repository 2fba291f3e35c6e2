#ifndef UNLEARN_IDX_HPP
#define UNLEARN_IDX_HPP

#include <set>
#include <string>

#include "unlearn/data.hpp"

namespace unlearn {

// Loads an IDX image/label pair (big-endian magic 0x00000803 / 0x00000801),
// keeping only the listed original labels, remapped to 0..k-1 in ascending
// original order. Pixels are flattened and scaled to [0, 1]; ids follow file
// order. Throws MalformedIdx on bad magic or truncation, EmptySelection when
// the filter keeps nothing.
Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path,
                      const std::set<int>& keep_labels);

} // namespace unlearn

#endif // UNLEARN_IDX_HPP
