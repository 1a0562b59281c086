#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "moeval/errors.hpp"
#include "moeval/responders.hpp"

namespace moeval::responders {

namespace {

using nlohmann::json;

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint is not a URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// Simple counting semaphore; caps concurrent in-flight requests.
class Gate {
public:
    explicit Gate(int slots) : slots_(slots) {}
    void enter() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return slots_ > 0; });
        --slots_;
    }
    void leave() {
        {
            std::lock_guard lock(mutex_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
};

class RemoteResponder final : public Responder {
public:
    explicit RemoteResponder(const ResponderSpec& spec)
        : id_(spec.effective_id()), opts_(spec.remote), gate_(spec.remote.max_in_flight) {
        if (!opts_.api_key_env.empty()) {
            const char* key = std::getenv(opts_.api_key_env.c_str());
            if (!key || !*key) {
                throw ConfigError("credential env var '" + opts_.api_key_env + "' is not set");
            }
            api_key_ = key;
        }
        const SplitUrl split = split_url(opts_.endpoint);
        base_ = split.base;
        path_ = split.path;
    }

    ResponseOutcome respond(const trialgen::TrialSpec& spec,
                            const prompting::PromptArtifact& prompt) override {
        gate_.enter();
        const auto started = std::chrono::steady_clock::now();
        ResponseOutcome out = post_with_retries(spec, prompt);
        out.latency_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        gate_.leave();
        return out;
    }

    const std::string& id() const override { return id_; }
    int max_in_flight() const override { return opts_.max_in_flight; }

private:
    ResponseOutcome post_with_retries(const trialgen::TrialSpec& spec,
                                      const prompting::PromptArtifact& prompt) {
        json body;
        body["model"] = opts_.model_id;
        body["messages"] = json::array({{{"role", "user"}, {"content", prompt.text}}});
        body["temperature"] = 0;
        const std::string payload = body.dump();

        for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(opts_.backoff_base_ms << (attempt - 1)));
            }
            httplib::Client client(base_);
            client.set_connection_timeout(opts_.timeout_seconds, 0);
            client.set_read_timeout(opts_.timeout_seconds, 0);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res || res->status == 429 || res->status >= 500) continue;  // transport-class

            if (res->status < 200 || res->status >= 300) {
                // Non-retryable protocol failure; scored as an invalid outcome.
                ResponseOutcome out;
                out.invalid_reason = "http-" + std::to_string(res->status);
                return out;
            }
            return score_reply(res->body, spec.option_count);
        }
        ResponseOutcome out;
        out.invalid_reason = "transport";
        return out;
    }

    static ResponseOutcome score_reply(const std::string& body, int option_count) {
        ResponseOutcome out;
        std::string content;
        try {
            const json reply = json::parse(body);
            content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            out.invalid_reason = "malformed-reply";
            return out;
        }
        out.raw_output = content;
        const ParsedIndex parsed = parse_index(content, option_count);
        if (parsed.valid) {
            out.valid = true;
            out.position = parsed.value;
        } else {
            out.invalid_reason = parsed.reason;
        }
        return out;
    }

    std::string id_;
    RemoteOptions opts_;
    std::string api_key_;
    std::string base_;
    std::string path_;
    Gate gate_;
};

}  // namespace

std::unique_ptr<Responder> make_remote_responder(const ResponderSpec& spec) {
    return std::make_unique<RemoteResponder>(spec);
}

}  // namespace moeval::responders
