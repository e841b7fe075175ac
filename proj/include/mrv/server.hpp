// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "mrv/codec.hpp"
#include "mrv/dataset.hpp"
#include "mrv/log.hpp"
#include "mrv/pipeline.hpp"
#include "mrv/protocol.hpp"
#include "mrv/segmentation.hpp"

namespace mrv {

struct ServerConfig {
  std::string host = "127.0.0.1";
  uint16_t port = 0;  // 0 = ephemeral
  Region crop{};      // must match the client's crop; zero-size = full frame
  VerificationPolicy policy{0.5};
};

/// The edge side: accepts sessions, decodes uploaded frame pairs, aligns,
/// segments, verifies and replies with the verdict plus step control.
///
/// Session shape per connection: SessionInit, then alternating
/// ReferenceFrame / TargetFrame pairs. A fresh SessionInit is accepted
/// wherever a ReferenceFrame is legal and resets the step context, which
/// lets a dataset-driven client walk arbitrary sample sequences. No state
/// outlives the connection: the server is stateless across sessions.
class EdgeServer {
 public:
  EdgeServer(ServerConfig config, std::shared_ptr<Segmenter> segmenter,
             std::shared_ptr<const DatasetManifest> manifest = nullptr)
      : config_(std::move(config)), segmenter_(std::move(segmenter)),
        manifest_(std::move(manifest)) {}

  ~EdgeServer() { stop(); }

  void start() {
    listener_ = TcpListener::bind(config_.host, config_.port);
    running_.store(true);
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  void stop() {
    if (!running_.exchange(false)) return;
    listener_.close();
    if (accept_thread_.joinable()) accept_thread_.join();
    {
      // unblock workers parked in recv on still-open sessions
      std::lock_guard<std::mutex> lock(conns_mu_);
      for (int fd : open_conns_) ::shutdown(fd, SHUT_RDWR);
    }
    std::lock_guard<std::mutex> lock(workers_mu_);
    for (auto& t : workers_)
      if (t.joinable()) t.join();
    workers_.clear();
  }

  uint16_t port() const { return listener_.port(); }

 private:
  struct Session {
    std::optional<SessionInitMsg> init;
    std::optional<ReferenceFrameMsg> ref_msg;
    std::optional<Frame> ref_frame;
    uint32_t current_step = 0;
  };

  void accept_loop() {
    while (running_.load()) {
      auto conn = listener_.accept();
      if (!conn) break;  // listener closed
      std::lock_guard<std::mutex> lock(workers_mu_);
      workers_.emplace_back(
          [this](TcpStream stream) { handle_connection(std::move(stream)); }, std::move(*conn));
    }
  }

  void handle_connection(TcpStream stream) {
    {
      std::lock_guard<std::mutex> lock(conns_mu_);
      open_conns_.insert(stream.fd());
    }
    Session session;
    try {
      while (running_.load()) {
        WireMessage msg = recv_message(stream);
        if (!dispatch(stream, session, msg)) break;
      }
    } catch (const Error& e) {
      // framing faults get a best-effort error reply; connection drops are
      // simply the end of the session
      if (e.code() != Errc::ConnectionLost && e.code() != Errc::Timeout) {
        log_warn(std::string("session aborted: ") + e.what());
        try {
          send_message(stream, ErrorMsg{uint16_t(WireErrorCode::MalformedPayload), e.what()});
        } catch (...) {
        }
      }
    } catch (const std::exception& e) {
      log_warn(std::string("session crashed: ") + e.what());
    }
    std::lock_guard<std::mutex> lock(conns_mu_);
    open_conns_.erase(stream.fd());
  }

  // returns false when the connection should close
  bool dispatch(TcpStream& stream, Session& session, const WireMessage& msg) {
    if (const auto* init = std::get_if<SessionInitMsg>(&msg)) {
      if (session.ref_msg) {
        send_message(stream,
                     ErrorMsg{uint16_t(WireErrorCode::OutOfOrder),
                              "SessionInit while a reference frame is pending"});
        return false;
      }
      session.init = *init;
      session.current_step = init->step_index;
      return true;
    }
    if (const auto* ref = std::get_if<ReferenceFrameMsg>(&msg)) {
      if (!session.init) {
        send_message(stream, ErrorMsg{uint16_t(WireErrorCode::OutOfOrder),
                                      "ReferenceFrame before SessionInit"});
        return false;
      }
      try {
        session.ref_frame = decode(ref->payload);
      } catch (const Error& e) {
        session.ref_frame.reset();
        session.ref_msg.reset();
        send_message(stream, ErrorMsg{uint16_t(WireErrorCode::MalformedPayload), e.what()});
        return true;  // recoverable: framing is still aligned
      }
      session.ref_msg = *ref;
      return true;
    }
    if (const auto* tgt = std::get_if<TargetFrameMsg>(&msg)) {
      if (!session.init || !session.ref_msg) {
        send_message(stream, ErrorMsg{uint16_t(WireErrorCode::OutOfOrder),
                                      "TargetFrame before ReferenceFrame"});
        return false;
      }
      handle_pair(stream, session, *tgt);
      session.ref_msg.reset();
      session.ref_frame.reset();
      return true;
    }
    send_message(stream, ErrorMsg{uint16_t(WireErrorCode::OutOfOrder),
                                  "unexpected message type on the upload path"});
    return false;
  }

  void handle_pair(TcpStream& stream, Session& session, const TargetFrameMsg& tgt) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    Frame target;
    try {
      target = decode(tgt.payload);
    } catch (const Error& e) {
      send_message(stream, ErrorMsg{uint16_t(WireErrorCode::MalformedPayload), e.what()});
      return;
    }
    auto decode_us = std::chrono::duration_cast<std::chrono::microseconds>(clock::now() - t0);

    t0 = clock::now();
    VerificationDecision decision;
    try {
      std::vector<Point2> ref_pts, tgt_pts;
      for (auto [x, y] : session.ref_msg->alignment_points) ref_pts.push_back({x, y});
      for (auto [x, y] : tgt.alignment_points) tgt_pts.push_back({x, y});
      Frame aligned = align_received_target(target, tgt_pts, ref_pts,
                                            session.ref_frame->width(),
                                            session.ref_frame->height());
      SegmentQuery query;
      query.frame_key = frame_key_for(session.current_step);
      query.step_class = static_cast<int>(session.init->step_class);
      query.crop = config_.crop;
      decision = verify_frames(*session.ref_frame, aligned, *segmenter_, query, config_.policy);
    } catch (const Error& e) {
      // segmentation / verification faults keep the session alive
      WireErrorCode code = (e.code() == Errc::UnknownFrame || e.code() == Errc::SegmenterFailure)
                               ? WireErrorCode::SegmenterFault
                               : WireErrorCode::VerificationFault;
      send_message(stream, ErrorMsg{uint16_t(code), e.what()});
      return;
    }
    auto postproc_us = std::chrono::duration_cast<std::chrono::microseconds>(clock::now() - t0);

    VerifyResultMsg result;
    result.pass = decision.pass ? 1 : 0;
    result.iou_micro = static_cast<uint32_t>(std::lround(decision.iou * 1e6));
    result.server_decode_us = static_cast<uint32_t>(decode_us.count());
    result.server_postproc_us = static_cast<uint32_t>(postproc_us.count());
    send_message(stream, result);

    // advance on pass, repeat the step on fail
    if (decision.pass) ++session.current_step;
    send_message(stream, StepControlMsg{session.current_step});
  }

  std::string frame_key_for(uint32_t step_index) const {
    if (manifest_ && step_index < manifest_->samples.size())
      return manifest_->samples[step_index].source_id;
    return std::to_string(step_index);
  }

  ServerConfig config_;
  std::shared_ptr<Segmenter> segmenter_;
  std::shared_ptr<const DatasetManifest> manifest_;
  TcpListener listener_;
  std::thread accept_thread_;
  std::mutex workers_mu_;
  std::vector<std::thread> workers_;
  std::mutex conns_mu_;
  std::set<int> open_conns_;
  std::atomic<bool> running_{false};
};

}  // namespace mrv
