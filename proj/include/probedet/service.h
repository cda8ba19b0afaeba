#pragma once

#include <memory>
#include <string>

#include "probedet/commands.h"

namespace probedet {

// HTTP/1.1 scoring service over an immutable detector.
//   GET  /v1/health -> 200 {"status": "ok", "model_version": ...}
//   POST /v1/score  (body: one RGAF file) -> 200 DetectionReport JSON,
//                   400 on unreadable bodies, 422 on shape mismatch.
class ScoringService {
 public:
  explicit ScoringService(LoadedDetector detector);
  ~ScoringService();

  ScoringService(const ScoringService&) = delete;
  ScoringService& operator=(const ScoringService&) = delete;

  // Binds and serves until Stop(); false if the address cannot be bound.
  bool Listen(const std::string& host, int port);

  // Bind only; call ListenAfterBind() to start serving. Bind() reports
  // whether the address was free, BindToAnyPort() returns the chosen port or
  // -1.
  bool Bind(const std::string& host, int port);
  int BindToAnyPort(const std::string& host);
  bool ListenAfterBind();

  void Stop();
  void WaitUntilReady() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace probedet
