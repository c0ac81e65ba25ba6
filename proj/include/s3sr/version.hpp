#pragma once

#define S3SR_VERSION "0.1.0"

namespace s3sr {
inline constexpr const char* version = S3SR_VERSION;
}
