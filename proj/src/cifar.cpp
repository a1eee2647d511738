#include "tbn/cifar.hpp"

#include <algorithm>
#include <string>

#include "tbn/error.hpp"

namespace tbn::cifar {

dvs::GrayFrame Record::gray() const {
    const std::span<const std::uint8_t> all(pixels);
    return dvs::rgb_to_gray(all.subspan(0, kPlane), all.subspan(kPlane, kPlane), all.subspan(2 * kPlane, kPlane),
                            kSide, kSide);
}

std::vector<Record> parse(std::span<const std::uint8_t> bytes) {
    const std::size_t whole = bytes.size() / kRecordBytes;
    if (bytes.size() % kRecordBytes != 0) {
        const std::size_t offset = whole * kRecordBytes;
        fail(ErrorKind::Format, "CIFAR-10: truncated record at byte offset " + std::to_string(offset) + " (" +
                                    std::to_string(bytes.size() - offset) + " of " + std::to_string(kRecordBytes) +
                                    " bytes)");
    }
    std::vector<Record> out(whole);
    for (std::size_t i = 0; i < whole; ++i) {
        const auto rec = bytes.subspan(i * kRecordBytes, kRecordBytes);
        out[i].label = rec[0];
        std::copy(rec.begin() + 1, rec.end(), out[i].pixels.begin());
    }
    return out;
}

} // namespace tbn::cifar
