#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace hkflow {

enum class ErrorCode {
    DegenerateMesh,
    OpenMesh,
    InvalidMesh,
    TimeBeyondTmax,
    EmptyTrajectory,
    NotMeanConvex,
    ParabolicityLost,
    StepUnderflow,
    InsufficientSamples,
    NegativeField,
    HypothesisViolated,
    ExponentOutOfRange,
    BetaTooSmall,
    NoBlowup,
    MeshNotFound,
    ParseError,
    IoError,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::DegenerateMesh: return "DegenerateMesh";
    case ErrorCode::OpenMesh: return "OpenMesh";
    case ErrorCode::InvalidMesh: return "InvalidMesh";
    case ErrorCode::TimeBeyondTmax: return "TimeBeyondTmax";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::NotMeanConvex: return "NotMeanConvex";
    case ErrorCode::ParabolicityLost: return "ParabolicityLost";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NegativeField: return "NegativeField";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorCode::BetaTooSmall: return "BetaTooSmall";
    case ErrorCode::NoBlowup: return "NoBlowup";
    case ErrorCode::MeshNotFound: return "MeshNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable error code.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message)
        , m_code(code)
    {}

    ErrorCode code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};

inline void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition) throw Error(code, message);
}

namespace detail {
inline std::atomic<int>& thread_override()
{
    static std::atomic<int> value{0};
    return value;
}
} // namespace detail

/// Kernel parallelism cap. HKFLOW_THREADS overrides the hardware default.
inline int max_threads()
{
    if (int forced = detail::thread_override().load(); forced > 0) return forced;
    static const int from_env = [] {
        int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        if (const char* env = std::getenv("HKFLOW_THREADS")) {
            int requested = std::atoi(env);
            if (requested > 0) return std::min(requested, hw);
        }
        return hw;
    }();
    return from_env;
}

inline void set_max_threads(int threads)
{
    detail::thread_override().store(threads);
}

/// Runs fn(i) for i in [0, n). Each index must write only its own output slot.
template <typename Fn>
void parallel_for(Eigen::Index n, Fn&& fn, Eigen::Index grain = 512)
{
    const int threads = static_cast<int>(std::min<Eigen::Index>(max_threads(), (n + grain - 1) / grain));
    if (threads <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    const Eigen::Index chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const Eigen::Index begin = t * chunk;
        const Eigen::Index end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([begin, end, &fn] {
            for (Eigen::Index i = begin; i < end; ++i) fn(i);
        });
    }
}

} // namespace hkflow
