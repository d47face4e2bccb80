#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace secrado {

/// Envelope for every value exchanged between simulated parties.
struct ProtocolMessage {
    int64_t seq = 0;  // per (sender, receiver) pair, strictly increasing
    std::string sender;
    std::string receiver;
    std::string protocol;
    std::string step;
    std::vector<uint8_t> payload;
};

/// What a party legitimately learns when it decrypts or otherwise
/// observes a plaintext.  Masked values are uniform junk to the
/// observer; aggregates are blind-sum or rado-level quantities the
/// threat model permits.
enum class ObservationKind {
    masked,     // two-party blinded value (uniform / statistically hidden)
    aggregate,  // multi-party aggregate after blind addition
    final_out,  // protocol output (classifier, classification sign)
    metadata,   // public shapes, feature-presence vectors, dictionary
};

const char* to_string(ObservationKind kind);

/// Append-only per-party record of observed plaintexts.  The honest-
/// but-curious claims are checked against this log, not against good
/// intentions.
class AuditLog {
  public:
    struct Event {
        std::string party;
        std::string step;
        ObservationKind kind;
        std::string summary;  // compact rendering of the observed value(s)
    };

    void record(std::string party, std::string step, ObservationKind kind, std::string summary);
    const std::vector<Event>& events() const { return events_; }
    std::vector<Event> events_for(const std::string& party) const;
    int decrypt_count(const std::string& party) const;

  private:
    std::vector<Event> events_;
};

/// Deterministic in-process message bus.  Parties register a request
/// handler; request() delivers the payload synchronously and records
/// both the request and the reply in the transcript.  post() is a
/// one-way transfer into a party's mailbox handler.
class Bus {
  public:
    using Handler =
        std::function<std::vector<uint8_t>(const std::string& step, const std::vector<uint8_t>&)>;

    explicit Bus(int64_t message_budget = 1000000) : budget_(message_budget) {}

    void register_party(const std::string& name, Handler handler);
    bool has_party(const std::string& name) const;

    std::vector<uint8_t> request(const std::string& sender, const std::string& receiver,
                                 const std::string& protocol, const std::string& step,
                                 std::vector<uint8_t> payload);
    void post(const std::string& sender, const std::string& receiver, const std::string& protocol,
              const std::string& step, std::vector<uint8_t> payload);

    const std::vector<ProtocolMessage>& transcript() const { return transcript_; }
    void write_transcript(const std::filesystem::path& path) const;
    static std::vector<ProtocolMessage> read_transcript(const std::filesystem::path& path);

    AuditLog& audit() { return audit_; }
    const AuditLog& audit() const { return audit_; }

  private:
    std::map<std::string, Handler> parties_;
    std::vector<ProtocolMessage> transcript_;
    std::map<std::pair<std::string, std::string>, int64_t> seq_;
    int64_t budget_;
    AuditLog audit_;

    ProtocolMessage& log(const std::string& sender, const std::string& receiver,
                         const std::string& protocol, const std::string& step,
                         std::vector<uint8_t> payload);
};

}  // namespace secrado
