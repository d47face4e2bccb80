#include "secrado/bus.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace secrado {

namespace {

// RFC 4648 base64, no padding stripped.
const char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const std::vector<uint8_t>& data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= data.size()) {
        uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(kB64[(v >> 6) & 63]);
        out.push_back(kB64[v & 63]);
        i += 3;
    }
    if (i + 1 == data.size()) {
        uint32_t v = data[i] << 16;
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == data.size()) {
        uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(kB64[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

std::vector<uint8_t> b64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        if (c == '=') return -1;
        throw std::runtime_error("transcript: invalid base64");
    };
    std::vector<uint8_t> out;
    uint32_t acc = 0;
    int have = 0;
    for (char c : text) {
        int v = value_of(c);
        if (v < 0) break;
        acc = (acc << 6) | static_cast<uint32_t>(v);
        have += 6;
        if (have >= 8) {
            have -= 8;
            out.push_back(static_cast<uint8_t>((acc >> have) & 0xff));
        }
    }
    return out;
}

}  // namespace

const char* to_string(ObservationKind kind) {
    switch (kind) {
        case ObservationKind::masked: return "masked";
        case ObservationKind::aggregate: return "aggregate";
        case ObservationKind::final_out: return "final";
        case ObservationKind::metadata: return "metadata";
    }
    return "?";
}

void AuditLog::record(std::string party, std::string step, ObservationKind kind,
                      std::string summary) {
    events_.push_back(Event{std::move(party), std::move(step), kind, std::move(summary)});
}

std::vector<AuditLog::Event> AuditLog::events_for(const std::string& party) const {
    std::vector<Event> out;
    for (const auto& e : events_)
        if (e.party == party) out.push_back(e);
    return out;
}

int AuditLog::decrypt_count(const std::string& party) const {
    int n = 0;
    for (const auto& e : events_)
        if (e.party == party) ++n;
    return n;
}

void Bus::register_party(const std::string& name, Handler handler) {
    if (parties_.count(name)) throw std::invalid_argument("bus: party already registered: " + name);
    parties_[name] = std::move(handler);
}

bool Bus::has_party(const std::string& name) const {
    return parties_.count(name) > 0;
}

ProtocolMessage& Bus::log(const std::string& sender, const std::string& receiver,
                          const std::string& protocol, const std::string& step,
                          std::vector<uint8_t> payload) {
    if (static_cast<int64_t>(transcript_.size()) >= budget_)
        throw std::runtime_error("bus: message budget exhausted");
    ProtocolMessage msg;
    msg.seq = ++seq_[{sender, receiver}];
    msg.sender = sender;
    msg.receiver = receiver;
    msg.protocol = protocol;
    msg.step = step;
    msg.payload = std::move(payload);
    transcript_.push_back(std::move(msg));
    return transcript_.back();
}

std::vector<uint8_t> Bus::request(const std::string& sender, const std::string& receiver,
                                  const std::string& protocol, const std::string& step,
                                  std::vector<uint8_t> payload) {
    auto it = parties_.find(receiver);
    if (it == parties_.end()) throw std::runtime_error("bus: unknown party: " + receiver);
    const ProtocolMessage& msg = log(sender, receiver, protocol, step, std::move(payload));
    std::vector<uint8_t> reply = it->second(step, msg.payload);
    log(receiver, sender, protocol, step + ".reply", reply);
    return reply;
}

void Bus::post(const std::string& sender, const std::string& receiver, const std::string& protocol,
               const std::string& step, std::vector<uint8_t> payload) {
    auto it = parties_.find(receiver);
    if (it == parties_.end()) throw std::runtime_error("bus: unknown party: " + receiver);
    const ProtocolMessage& msg = log(sender, receiver, protocol, step, std::move(payload));
    it->second(step, msg.payload);
}

void Bus::write_transcript(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open transcript file: " + path.string());
    for (const auto& msg : transcript_) {
        nlohmann::json line = {
            {"seq", msg.seq},           {"sender", msg.sender}, {"receiver", msg.receiver},
            {"protocol", msg.protocol}, {"step", msg.step},     {"payload", b64_encode(msg.payload)},
        };
        out << line.dump() << '\n';
    }
}

std::vector<ProtocolMessage> Bus::read_transcript(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open transcript file: " + path.string());
    std::vector<ProtocolMessage> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        ProtocolMessage msg;
        msg.seq = j.at("seq").get<int64_t>();
        msg.sender = j.at("sender").get<std::string>();
        msg.receiver = j.at("receiver").get<std::string>();
        msg.protocol = j.at("protocol").get<std::string>();
        msg.step = j.at("step").get<std::string>();
        msg.payload = b64_decode(j.at("payload").get<std::string>());
        out.push_back(std::move(msg));
    }
    return out;
}

}  // namespace secrado
