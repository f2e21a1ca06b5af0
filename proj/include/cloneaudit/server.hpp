#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "cloneaudit/triage.hpp"

namespace cloneaudit::triage {

/// HTTP+JSON front end of a TriageStore.
class TriageServer {
public:
    struct Options {
        std::optional<std::filesystem::path> static_dir;  ///< served at /
    };

    TriageServer(TriageStore& store, Options opts);
    explicit TriageServer(TriageStore& store) : TriageServer(store, Options{}) {}
    ~TriageServer();

    /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind.
    bool serve();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace cloneaudit::triage
