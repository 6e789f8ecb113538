#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

namespace sv2 {

using Md5 = std::array<std::uint8_t, 16>;

Md5 md5(std::span<const std::uint8_t> data);
std::string to_hex(std::span<const std::uint8_t> data);

// Incremental MD5 for streamed inputs (carved images, CLI input digests).
class Md5Stream {
public:
    Md5Stream();
    ~Md5Stream();
    Md5Stream(Md5Stream&&) noexcept;
    Md5Stream& operator=(Md5Stream&&) noexcept;

    void update(std::span<const std::uint8_t> data);
    Md5 finish();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sv2
