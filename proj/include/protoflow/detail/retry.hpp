#pragma once

#include <thread>

#include "protoflow/error.hpp"

namespace protoflow {

template <typename Op>
auto with_retries(const RetryPolicy& policy, Op&& op) -> decltype(op()) {
    auto backoff = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return op();
        } catch (const BackendError& e) {
            if (!e.retryable()) throw;
            if (attempt >= policy.attempts)
                throw BackendError(std::string(e.what()) + " (after " + std::to_string(attempt) + " attempts)", true);
        }
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
    }
}

}  // namespace protoflow
