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

#include "roiqa/service.hpp"

#include <cctype>

#include "httplib.h"
#include "json_util.hpp"
#include "roiqa/image_io.hpp"
#include "roiqa/mask.hpp"
#include "roiqa/records.hpp"

namespace roiqa {

using detail::Json;

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, Json{{"error", message}});
}

std::string percent_encode(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

Json scale_json(const LevelScale& scale) {
  Json out = Json::array();
  const auto& names = scale.categories();
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.push_back({{"value", i}, {"name", std::string(names[i])}});
  }
  return out;
}

Json scales() {
  Json distortion = scale_json(LevelScale::severity(kHumanScaleMax));
  distortion.push_back({{"value", kNonExistentRating}, {"name", "Non-existent"}});
  Json types = Json::array();
  for (DistortionType t : kAllDistortionTypes) types.push_back(std::string(to_string(t)));
  return {{"distortion_types", types},
          {"distortion", distortion},
          {"quality", scale_json(LevelScale::quality(kHumanScaleMax))},
          {"importance", scale_json(LevelScale::importance(kHumanScaleMax))}};
}

// Runs a handler and converts library errors into status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    fail(res, 400, e.what());
  } catch (const NotFoundError& e) {
    fail(res, 404, e.what());
  } catch (const ConflictError& e) {
    fail(res, 409, e.what());
  } catch (const std::exception& e) {
    fail(res, 500, e.what());
  }
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationStore& store;
  httplib::Server server;
  explicit Impl(AnnotationStore& s) : store(s) {}
};

AnnotationServer::AnnotationServer(AnnotationStore& store) : impl_(std::make_unique<Impl>(store)) {
  auto& svr = impl_->server;
  AnnotationStore& st = impl_->store;
  svr.set_payload_max_length(1 << 20);

  svr.Get("/api/tasks/next", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("annotator")) throw ValidationError("missing query parameter 'annotator'");
      const std::string annotator = req.get_param_value("annotator");
      const auto roi = st.next_task(annotator);
      if (!roi) {
        reply(res, 200, Json{{"task", nullptr}});
        return;
      }
      const auto agg = st.aggregate(*roi);
      reply(res, 200,
            Json{{"task",
                  {{"roi_id", *roi},
                   {"roi_url", "/api/rois/" + percent_encode(*roi)},
                   {"rater_count", agg.rater_count},
                   {"remaining", kFinalizeRaters - agg.rater_count}}}});
    });
  });

  svr.Get(R"(/api/rois/(.+))", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const RoiInfo& info = st.roi(id);
      const auto image = read_bytes(info.image_path);
      const RegionMask mask = decode_mask(read_bytes(info.dataset_dir / info.mask_path));
      const auto agg = st.aggregate(id);
      reply(res, 200,
            Json{{"roi_id", info.roi_id},
                 {"image_id", info.image_id},
                 {"image_png_base64", base64_encode(image)},
                 {"mask", Json::parse(rle_to_json(encode_rle(mask)))},
                 {"scales", scales()},
                 {"rater_count", agg.rater_count},
                 {"finalized", agg.finalized}});
    });
  });

  svr.Post("/api/ratings", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const RatingRecord r = parse_rating(req.body);
      const auto ack = st.submit(r);
      reply(res, 200,
            Json{{"roi_id", r.roi_id},
                 {"rater_count", ack.rater_count},
                 {"finalized", ack.finalized},
                 {"replaced", ack.replaced}});
    });
  });

  svr.Get("/api/progress", [&st](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      Json rois = Json::array();
      std::size_t finalized = 0;
      for (const auto& p : st.progress()) {
        rois.push_back({{"roi_id", p.roi_id}, {"rater_count", p.rater_count}, {"finalized", p.finalized}});
        finalized += p.finalized ? 1 : 0;
      }
      const std::size_t total = rois.size();
      reply(res, 200,
            Json{{"required_raters", kFinalizeRaters},
                 {"total", total},
                 {"finalized", finalized},
                 {"rois", std::move(rois)}});
    });
  });

  svr.Get("/api/export", [&st](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      std::string body;
      for (const auto& r : st.export_labels()) body += roi_label_to_json(r) + "\n";
      res.status = 200;
      res.set_content(body, "application/x-ndjson");
    });
  });
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  if (port == 0) {
    const int bound = svr.bind_to_any_port(host);
    if (bound <= 0) throw Error("cannot bind " + host + " to an ephemeral port");
    return bound;
  }
  if (!svr.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void AnnotationServer::run() {
  if (!impl_->server.listen_after_bind()) throw Error("annotation server stopped with an error");
}

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace roiqa
