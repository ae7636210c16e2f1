// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Non-smooth ops (relu, group_max, angular_margin, l2_normalize) report which
// branch each element took to the recorder installed on the current thread, if
// any. Two evaluations with equal digests went through the same smooth piece.

#include <cstdint>

namespace geolid::ad {

class BranchRecorder {
 public:
  void record(std::uint64_t v) noexcept {
    digest_ = (digest_ ^ v) * 0x100000001b3ULL;
    ++count_;
  }
  std::uint64_t digest() const noexcept { return digest_; }
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t digest_ = 0xcbf29ce484222325ULL;
  std::uint64_t count_ = 0;
};

inline BranchRecorder*& active_branch_recorder() noexcept {
  thread_local BranchRecorder* recorder = nullptr;
  return recorder;
}

// Installs `r` for the lifetime of the scope.
class BranchScope {
 public:
  explicit BranchScope(BranchRecorder& r) noexcept : previous_(active_branch_recorder()) {
    active_branch_recorder() = &r;
  }
  ~BranchScope() { active_branch_recorder() = previous_; }
  BranchScope(const BranchScope&) = delete;
  BranchScope& operator=(const BranchScope&) = delete;

 private:
  BranchRecorder* previous_;
};

}  // namespace geolid::ad
