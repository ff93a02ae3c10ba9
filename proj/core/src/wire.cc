// Copyright 2026 The IASSA Authors. All Rights Reserved.
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

#include "iassa/wire.h"

#include <fcntl.h>
#include <openssl/evp.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "iassa/error.h"

extern char** environ;

namespace iassa {
namespace {

using nlohmann::json;

json ParseLine(std::string_view line) {
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ProtocolError("malformed response: " +
                        std::string(line.substr(0, 120)));
  }
  return doc;
}

// Checks id and ok; throws RemoteError for ok:false.
void CheckEnvelope(const json& doc, uint64_t id) {
  const auto it = doc.find("id");
  if (it == doc.end() || !it->is_number_unsigned() ||
      it->get<uint64_t>() != id) {
    throw ProtocolError("response id does not match request id " +
                        std::to_string(id));
  }
  const auto ok = doc.find("ok");
  if (ok == doc.end() || !ok->is_boolean()) {
    throw ProtocolError("response lacks a boolean 'ok' field");
  }
  if (!ok->get<bool>()) {
    const auto err = doc.find("error");
    throw RemoteError("remote error: " + (err != doc.end() && err->is_string()
                                              ? err->get<std::string>()
                                              : std::string("(no message)")));
  }
}

Shape3 ParseShape(const json& value, const char* what) {
  if (!value.is_array() || value.size() != 3) {
    throw ProtocolError(std::string(what) + " shape must be [h, w, c]");
  }
  Shape3 shape{};
  for (size_t i = 0; i < 3; ++i) {
    if (!value[i].is_number_integer() || value[i].get<int64_t>() < 1 ||
        value[i].get<int64_t>() > (1 << 20)) {
      throw ProtocolError(std::string(what) + " shape entries must be positive integers");
    }
    shape[i] = value[i].get<int>();
  }
  return shape;
}

std::string ImageRequest(uint64_t id, const char* op, const ImageTensor& image) {
  json doc = {{"v", kProtocolVersion},
              {"id", id},
              {"op", op},
              {"shape", {image.height(), image.width(), image.channels()}},
              {"dtype", "f32le"},
              {"data", EncodeF32Base64(image.data())}};
  return doc.dump();
}

std::string ShapeString(const Shape3& s) {
  return "[" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," +
         std::to_string(s[2]) + "]";
}

void IgnoreSigpipeOnce() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string ErrnoText(int err) { return std::strerror(err); }

}  // namespace

std::string EncodeF32Base64(std::span<const float> values) {
  std::vector<uint8_t> bytes(values.size() * 4);
  for (size_t i = 0; i < values.size(); ++i) {
    const uint32_t bits = std::bit_cast<uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<uint8_t>(bits >> (8 * b));
  }
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

std::string EncodeF32Base64(std::span<const double> values) {
  std::vector<float> narrowed(values.begin(), values.end());
  return EncodeF32Base64(std::span<const float>(narrowed));
}

std::vector<float> DecodeF32Base64(std::string_view text, size_t expected_count) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 payload has a bad length");
  size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  std::vector<uint8_t> bytes(text.size() / 4 * 3);
  const int n = text.empty() ? 0
                             : EVP_DecodeBlock(bytes.data(),
                                               reinterpret_cast<const unsigned char*>(text.data()),
                                               static_cast<int>(text.size()));
  if (n < 0) throw ProtocolError("payload is not valid base64");
  const size_t length = static_cast<size_t>(n) - padding;
  if (length != expected_count * 4) {
    throw ProtocolError("payload holds " + std::to_string(length / 4) +
                        " floats, expected " + std::to_string(expected_count));
  }
  std::vector<float> values(expected_count);
  for (size_t i = 0; i < expected_count; ++i) {
    uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<uint32_t>(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

std::string HandshakeRequest(uint64_t id) {
  return json{{"v", kProtocolVersion}, {"id", id}, {"op", "handshake"}}.dump();
}

std::string ScoreRequest(uint64_t id, const ImageTensor& image) {
  return ImageRequest(id, "score", image);
}

std::string FeaturesRequest(uint64_t id, const ImageTensor& image) {
  return ImageRequest(id, "features", image);
}

Capabilities ParseHandshakeResponse(std::string_view line, uint64_t id) {
  const json doc = ParseLine(line);
  CheckEnvelope(doc, id);
  const auto v = doc.find("v");
  if (v == doc.end() || !v->is_number_integer()) {
    throw ProtocolError("handshake response lacks a protocol version");
  }
  if (v->get<int64_t>() != kProtocolVersion) {
    throw ProtocolError("protocol version mismatch: server speaks v" +
                        std::to_string(v->get<int64_t>()) + ", client v" +
                        std::to_string(kProtocolVersion));
  }
  Capabilities caps;
  const auto classes = doc.find("class_count");
  if (classes == doc.end() || !classes->is_number_integer() ||
      classes->get<int64_t>() < 1 ||
      classes->get<int64_t>() > std::numeric_limits<int>::max()) {
    throw ProtocolError("handshake response lacks a positive class_count");
  }
  caps.class_count = classes->get<int>();
  const auto kind = doc.find("score_kind");
  if (kind == doc.end() || !kind->is_string()) {
    throw ProtocolError("handshake response lacks score_kind");
  }
  caps.score_kind = ParseScoreKind(kind->get<std::string>());
  const auto dims = doc.find("feature_dims");
  if (dims != doc.end() && !dims->is_null()) {
    if (!dims->is_array() || dims->size() != 4) {
      throw ProtocolError("feature_dims must list four [h, w, c] shapes");
    }
    std::vector<Shape3> shapes;
    for (const json& d : *dims) shapes.push_back(ParseShape(d, "feature_dims"));
    caps.feature_dims = std::move(shapes);
  }
  return caps;
}

std::vector<double> ParseScoreResponse(std::string_view line, uint64_t id,
                                       int class_count) {
  const json doc = ParseLine(line);
  CheckEnvelope(doc, id);
  const auto scores = doc.find("scores");
  if (scores == doc.end() || !scores->is_array()) {
    throw ProtocolError("score response lacks a 'scores' array");
  }
  if (static_cast<int64_t>(scores->size()) != class_count) {
    throw ContractError("score response has " + std::to_string(scores->size()) +
                        " scores but the handshake declared " +
                        std::to_string(class_count));
  }
  std::vector<double> out;
  out.reserve(scores->size());
  for (const json& s : *scores) {
    if (s.is_number()) {
      out.push_back(s.get<double>());
    } else if (s.is_null()) {
      // JSON has no NaN; serializers write it as null.
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      throw ProtocolError("score entries must be numbers");
    }
  }
  return out;
}

FeatureLevels ParseFeaturesResponse(std::string_view line, uint64_t id,
                                    const Capabilities& caps) {
  const json doc = ParseLine(line);
  CheckEnvelope(doc, id);
  const auto levels = doc.find("levels");
  if (levels == doc.end() || !levels->is_array()) {
    throw ProtocolError("features response lacks a 'levels' array");
  }
  if (levels->size() != 4) {
    throw ContractError("features response has " + std::to_string(levels->size()) +
                        " levels, expected 4");
  }
  FeatureLevels out;
  for (size_t i = 0; i < levels->size(); ++i) {
    const json& level = (*levels)[i];
    if (!level.is_object() || !level.contains("shape") || !level.contains("data") ||
        !level["data"].is_string()) {
      throw ProtocolError("feature level needs 'shape' and 'data'");
    }
    const Shape3 shape = ParseShape(level["shape"], "feature level");
    if (caps.feature_dims && (*caps.feature_dims)[i] != shape) {
      throw ContractError("feature level " + std::to_string(i + 1) + " has shape " +
                          ShapeString(shape) + " but the handshake declared " +
                          ShapeString((*caps.feature_dims)[i]));
    }
    const size_t count = static_cast<size_t>(shape[0]) * shape[1] * shape[2];
    const std::vector<float> data =
        DecodeF32Base64(level["data"].get<std::string>(), count);
    out.emplace_back(shape[0], shape[1], shape[2],
                     std::vector<double>(data.begin(), data.end()));
  }
  return out;
}

json CapabilitiesToJson(const Capabilities& caps) {
  json doc = {{"class_count", caps.class_count},
              {"score_kind", ScoreKindName(caps.score_kind)}};
  if (caps.feature_dims) {
    json dims = json::array();
    for (const Shape3& s : *caps.feature_dims) dims.push_back({s[0], s[1], s[2]});
    doc["feature_dims"] = dims;
  } else {
    doc["feature_dims"] = nullptr;
  }
  return doc;
}

// --- SubprocessTransport ---------------------------------------------------

SubprocessTransport::SubprocessTransport(std::vector<std::string> argv,
                                         std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout) {
  if (argv_.empty() || argv_[0].empty()) {
    throw TransportError("no executable given for the subprocess oracle");
  }
  if (::access(argv_[0].c_str(), X_OK) != 0) {
    throw TransportError("cannot execute '" + argv_[0] + "': " + ErrnoText(errno));
  }
  IgnoreSigpipeOnce();

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw TransportError("pipe: " + ErrnoText(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError("pipe: " + ErrnoText(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::vector<char*> args;
  for (std::string& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, argv_[0].c_str(), &actions, nullptr,
                               args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw TransportError("cannot start '" + argv_[0] + "': " + ErrnoText(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
  ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
}

SubprocessTransport::~SubprocessTransport() { Shutdown(); }

void SubprocessTransport::Shutdown() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the child to exit; give it a moment, then kill.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::vector<std::string> SubprocessTransport::Exchange(
    std::span<const std::string> requests) {
  std::lock_guard<std::mutex> lock(mu_);
  if (to_child_ < 0) throw TransportError(Describe() + " is no longer running");

  std::string outgoing;
  for (const std::string& r : requests) {
    outgoing += r;
    outgoing += '\n';
  }
  size_t written = 0;
  std::vector<std::string> responses;
  responses.reserve(requests.size());

  // Writes and reads are interleaved so neither pipe can fill up and
  // deadlock both sides.
  while (responses.size() < requests.size()) {
    size_t newline;
    while (responses.size() < requests.size() &&
           (newline = read_buffer_.find('\n')) != std::string::npos) {
      responses.push_back(read_buffer_.substr(0, newline));
      read_buffer_.erase(0, newline + 1);
    }
    if (responses.size() == requests.size()) break;

    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {from_child_, POLLIN, 0};
    if (written < outgoing.size()) fds[n++] = {to_child_, POLLOUT, 0};
    const int rc = ::poll(fds, n, static_cast<int>(timeout_.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError("poll: " + ErrnoText(errno));
    }
    if (rc == 0) {
      Shutdown();
      throw TransportError(Describe() + " timed out after " +
                           std::to_string(timeout_.count()) + " ms");
    }
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = ::write(to_child_, outgoing.data() + written,
                                outgoing.size() - written);
      if (w > 0) {
        written += static_cast<size_t>(w);
      } else if (w < 0 && errno != EAGAIN && errno != EINTR) {
        const int err = errno;
        Shutdown();
        throw TransportError(Describe() + " stopped reading requests: " + ErrnoText(err));
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      const ssize_t r = ::read(from_child_, buf, sizeof(buf));
      if (r > 0) {
        read_buffer_.append(buf, static_cast<size_t>(r));
      } else if (r == 0) {
        Shutdown();
        throw TransportError(Describe() + " exited before answering");
      } else if (errno != EAGAIN && errno != EINTR) {
        const int err = errno;
        Shutdown();
        throw TransportError("read from " + Describe() + ": " + ErrnoText(err));
      }
    }
  }
  return responses;
}

std::string SubprocessTransport::Describe() const {
  return "subprocess '" + argv_[0] + "'";
}

// --- HttpTransport ---------------------------------------------------------

HttpTransport::HttpTransport(std::string_view url,
                             std::chrono::milliseconds timeout,
                             int max_in_flight)
    : timeout_(timeout), max_in_flight_(std::max(1, max_in_flight)) {
  std::string_view rest = url;
  if (rest.starts_with("http://")) rest.remove_prefix(7);
  if (rest.starts_with("https://")) {
    throw ArgumentError("https endpoints are not supported");
  }
  const size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  path_ = slash == std::string_view::npos ? "/v1" : std::string(rest.substr(slash));
  const size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    host_ = std::string(authority.substr(0, colon));
    const std::string port(authority.substr(colon + 1));
    try {
      port_ = std::stoi(port);
    } catch (const std::exception&) {
      throw ArgumentError("bad port in '" + std::string(url) + "'");
    }
  } else {
    host_ = std::string(authority);
  }
  if (host_.empty()) throw ArgumentError("no host in '" + std::string(url) + "'");
}

std::vector<std::string> HttpTransport::Exchange(
    std::span<const std::string> requests) {
  httplib::Client client(host_, port_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  std::string body;
  for (const std::string& r : requests) {
    body += r;
    body += '\n';
  }
  const httplib::Result res = client.Post(path_, body, "application/x-ndjson");
  if (!res) {
    throw TransportError(Describe() + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError(Describe() + " answered HTTP " + std::to_string(res->status));
  }
  std::vector<std::string> lines;
  std::istringstream in(res->body);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  if (lines.size() != requests.size()) {
    throw ProtocolError(Describe() + " returned " + std::to_string(lines.size()) +
                        " responses for " + std::to_string(requests.size()) +
                        " requests");
  }
  return lines;
}

std::string HttpTransport::Describe() const {
  return "http://" + host_ + ":" + std::to_string(port_) + path_;
}

// --- WireEndpoint ------------------------------------------------------------

WireEndpoint::WireEndpoint(std::unique_ptr<Transport> transport)
    : transport_(std::move(transport)) {}

const Capabilities& WireEndpoint::Handshake() {
  std::lock_guard<std::mutex> lock(handshake_mu_);
  if (!caps_) {
    const uint64_t id = NextId();
    const std::string request = HandshakeRequest(id);
    const std::vector<std::string> lines =
        transport_->Exchange(std::span<const std::string>(&request, 1));
    caps_ = ParseHandshakeResponse(lines.at(0), id);
  }
  return *caps_;
}

std::vector<std::vector<double>> WireEndpoint::ScoreBatch(
    std::span<const ImageTensor> images) {
  const Capabilities& caps = Handshake();
  std::vector<uint64_t> ids;
  std::vector<std::string> requests;
  ids.reserve(images.size());
  requests.reserve(images.size());
  for (const ImageTensor& image : images) {
    ids.push_back(NextId());
    requests.push_back(ScoreRequest(ids.back(), image));
  }
  const std::vector<std::string> lines = transport_->Exchange(requests);
  std::vector<std::vector<double>> out;
  out.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    out.push_back(ParseScoreResponse(lines[i], ids[i], caps.class_count));
  }
  return out;
}

FeatureLevels WireEndpoint::Features(const ImageTensor& image) {
  const Capabilities& caps = Handshake();
  const uint64_t id = NextId();
  const std::string request = FeaturesRequest(id, image);
  const std::vector<std::string> lines =
      transport_->Exchange(std::span<const std::string>(&request, 1));
  return ParseFeaturesResponse(lines.at(0), id, caps);
}

WireScoringOracle::WireScoringOracle(std::shared_ptr<WireEndpoint> endpoint)
    : endpoint_(std::move(endpoint)), caps_(endpoint_->Handshake()) {}

std::vector<std::vector<double>> WireScoringOracle::Score(
    std::span<const ImageTensor> images) {
  return endpoint_->ScoreBatch(images);
}

WireFeatureProvider::WireFeatureProvider(std::shared_ptr<WireEndpoint> endpoint)
    : endpoint_(std::move(endpoint)) {
  endpoint_->Handshake();
}

FeatureLevels WireFeatureProvider::Features(const ImageTensor& image) {
  return endpoint_->Features(image);
}

// --- Descriptors -------------------------------------------------------------

OracleDescriptor ParseOracleDescriptor(std::string_view text) {
  OracleDescriptor d;
  d.text = std::string(text);
  if (text.starts_with("builtin:")) {
    d.kind = OracleDescriptor::Kind::kBuiltin;
    std::string_view rest = text.substr(8);
    const size_t eq = rest.find('=');
    d.target = std::string(rest.substr(0, eq));
    if (eq != std::string_view::npos) d.args.emplace_back(rest.substr(eq + 1));
  } else if (text.starts_with("exec:")) {
    d.kind = OracleDescriptor::Kind::kExec;
    std::istringstream words{std::string(text.substr(5))};
    for (std::string word; words >> word;) {
      if (d.target.empty()) {
        d.target = word;
      } else {
        d.args.push_back(word);
      }
    }
  } else if (text.starts_with("http://")) {
    d.kind = OracleDescriptor::Kind::kHttp;
    d.target = std::string(text);
  } else if (text.starts_with("http:")) {
    d.kind = OracleDescriptor::Kind::kHttp;
    d.target = "http://" + std::string(text.substr(5));
  } else {
    throw ArgumentError("unknown oracle descriptor '" + std::string(text) +
                        "' (expected builtin:, exec: or http:)");
  }
  if (d.target.empty() || d.target == "http://") {
    throw ArgumentError("oracle descriptor '" + std::string(text) + "' has no target");
  }
  return d;
}

std::shared_ptr<WireEndpoint> ConnectEndpoint(const OracleDescriptor& descriptor,
                                              std::chrono::milliseconds timeout) {
  std::unique_ptr<Transport> transport;
  switch (descriptor.kind) {
    case OracleDescriptor::Kind::kExec: {
      std::vector<std::string> argv = {descriptor.target};
      argv.insert(argv.end(), descriptor.args.begin(), descriptor.args.end());
      transport = std::make_unique<SubprocessTransport>(std::move(argv), timeout);
      break;
    }
    case OracleDescriptor::Kind::kHttp:
      transport = std::make_unique<HttpTransport>(descriptor.target, timeout);
      break;
    case OracleDescriptor::Kind::kBuiltin:
      throw ArgumentError("builtin oracles have no wire endpoint");
  }
  auto endpoint = std::make_shared<WireEndpoint>(std::move(transport));
  endpoint->Handshake();
  return endpoint;
}

}  // namespace iassa
