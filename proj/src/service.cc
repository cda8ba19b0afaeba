#include "probedet/service.h"

#include "httplib.h"
#include "json.hpp"
#include "probedet/errors.h"
#include "probedet/scoring.h"
#include "probedet/tensor_store.h"

namespace probedet {

struct ScoringService::Impl {
  LoadedDetector detector;
  httplib::Server server;
};

namespace {

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape:
      return 422;
    case ErrorCode::kFormat:
    case ErrorCode::kCorruption:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kArgument:
      return 400;
    default:
      return 500;
  }
}

}  // namespace

ScoringService::ScoringService(LoadedDetector detector)
    : impl_(std::make_unique<Impl>()) {
  impl_->detector = std::move(detector);
  Impl* impl = impl_.get();

  // No SO_REUSEPORT: a second server must not share a busy port.
  impl->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  impl->server.Get("/v1/health", [impl](const httplib::Request&,
                                        httplib::Response& res) {
    const nlohmann::json body = {
        {"status", "ok"},
        {"model_version", impl->detector.model_version},
        {"layer_range",
         {impl->detector.model.layer_range.lo, impl->detector.model.layer_range.hi}},
        {"dim", impl->detector.model.dim},
        {"calibrated", impl->detector.threshold.has_value()}};
    res.set_content(body.dump(), "application/json");
  });

  impl->server.Post("/v1/score", [impl](const httplib::Request& req,
                                        httplib::Response& res) {
    try {
      const auto* data = reinterpret_cast<const std::byte*>(req.body.data());
      const ActivationTensor tensor =
          DecodeActivation(std::span<const std::byte>(data, req.body.size()));
      res.set_content(ReportToJson(Detect(tensor, impl->detector)),
                      "application/json");
    } catch (const Error& e) {
      res.status = HttpStatusFor(e.code());
      res.set_content(ErrorJson(ErrorCodeName(e.code()), e.what()),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(ErrorJson("INTERNAL_ERROR", e.what()), "application/json");
    }
  });
}

ScoringService::~ScoringService() { Stop(); }

bool ScoringService::Listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

bool ScoringService::Bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

int ScoringService::BindToAnyPort(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool ScoringService::ListenAfterBind() {
  return impl_->server.listen_after_bind();
}

void ScoringService::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void ScoringService::WaitUntilReady() const { impl_->server.wait_until_ready(); }

}  // namespace probedet
