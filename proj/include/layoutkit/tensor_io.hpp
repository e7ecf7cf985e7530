#pragma once

// flat binary tensor container: magic "LTT1", version, rank, dims, f32 data
#include <cstdint>
#include <string>
#include <vector>

#include "layoutkit/tensor.hpp"

namespace layoutkit {

struct TensorFile {
  std::vector<std::uint32_t> dims;
  std::vector<double> data;  // stored as float32 on disk
};

void save_tensor(const std::string& path,
                 const std::vector<std::uint32_t>& dims,
                 const std::vector<double>& data);
TensorFile load_tensor(const std::string& path);

void save_mat(const std::string& path, const Mat& m);
Mat load_mat(const std::string& path);

}  // namespace layoutkit
