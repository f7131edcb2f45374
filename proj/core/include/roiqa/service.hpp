// Copyright 2026 The roiqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <string>

#include "roiqa/annotation.hpp"

namespace roiqa {

/// JSON-over-HTTP front end for an AnnotationStore.
///
///   GET  /api/tasks/next?annotator=ID
///   GET  /api/rois/{id}          image (base64 PNG), RLE mask, rating scales
///   POST /api/ratings            RatingRecord body
///   GET  /api/progress
///   GET  /api/export             JSON lines of finalized labels
///
/// Errors carry {"error": message} with 400 (validation), 404 (unknown ids)
/// or 409 (finalized ROI).
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationStore& store);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds `host:port`; port 0 picks an ephemeral port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace roiqa
