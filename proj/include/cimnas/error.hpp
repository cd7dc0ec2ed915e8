/*******************************************************************************
* Copyright 2026 The cimnas Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cimnas {

enum class ErrorCode {
    MissingKey,
    EmptyChoiceList,
    UnknownTemplate,
    InvalidSpec,
    IndexOutOfRange,
    InvalidGenome,
    PrecisionOutOfRange,
    EmptyHistogram,
    MissingHistogram,
    InconsistentEncodingLength,
    ShapeMismatch,
    ZeroAccuracy,
    UnsetAnchor,
    ExhaustedSampling,
    LengthMismatch,
    SchemaMismatch,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::EmptyChoiceList: return "EmptyChoiceList";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidGenome: return "InvalidGenome";
    case ErrorCode::PrecisionOutOfRange: return "PrecisionOutOfRange";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::MissingHistogram: return "MissingHistogram";
    case ErrorCode::InconsistentEncodingLength: return "InconsistentEncodingLength";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroAccuracy: return "ZeroAccuracy";
    case ErrorCode::UnsetAnchor: return "UnsetAnchor";
    case ErrorCode::ExhaustedSampling: return "ExhaustedSampling";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure in the library is reported through this type; `code()`
/// identifies the condition and `what()` names the offending key or gene.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// 64-bit FNV-1a. Used for manifest hashes and for keying seeded noise, so
/// the result must not depend on the platform's std::hash.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

} // namespace cimnas
