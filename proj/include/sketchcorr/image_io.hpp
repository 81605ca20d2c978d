#pragma once

#include <torch/torch.h>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <filesystem>
#include <string>

#include "sketchcorr/common.hpp"

namespace sketchcorr {

// Images are (3, H, W) float tensors, RGB, values in [0, 1].

inline torch::Tensor mat_to_tensor(const cv::Mat& bgr) {
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  rgb.convertTo(rgb, CV_32FC3, 1.0 / 255.0);
  auto t = torch::from_blob(rgb.data, {rgb.rows, rgb.cols, 3}, torch::kFloat).clone();
  return t.permute({2, 0, 1}).contiguous();
}

inline cv::Mat tensor_to_mat(const torch::Tensor& image) {
  check(image.dim() == 3 && image.size(0) == 3, "expected (3, H, W) image tensor");
  auto t = image.detach().to(torch::kFloat).clamp(0, 1).mul(255.0).round().to(torch::kU8);
  t = t.permute({1, 2, 0}).contiguous();
  cv::Mat rgb(static_cast<int>(image.size(1)), static_cast<int>(image.size(2)), CV_8UC3,
              t.data_ptr<uint8_t>());
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr.clone();
}

inline torch::Tensor load_image(const std::filesystem::path& path, int side = 0) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  check(!m.empty(), "failed to read image: " + path.string());
  if (side > 0 && (m.rows != side || m.cols != side)) {
    cv::resize(m, m, cv::Size(side, side), 0, 0, cv::INTER_AREA);
  }
  return mat_to_tensor(m);
}

inline void save_image(const torch::Tensor& image, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  check(cv::imwrite(path.string(), tensor_to_mat(image)),
        "failed to write image: " + path.string());
}

}  // namespace sketchcorr
