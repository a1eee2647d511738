#include "tbn/tensor_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "tbn/error.hpp"

namespace tbn::io {

namespace {

class Writer {
public:
    void magic(const char (&m)[5]) { bytes_.insert(bytes_.end(), m, m + 4); }
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) {
        bytes_.push_back(static_cast<std::uint8_t>(v));
        bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }
    std::size_t size() const { return bytes_.size(); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

    void magic(const char (&m)[5]) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, m, 4) != 0)
            fail(ErrorKind::Format, std::string(what_) + ": bad magic, expected \"" + m + "\"");
        pos_ += 4;
    }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
        pos_ += 8;
        return v;
    }
    std::span<const std::uint8_t> raw(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    void version() {
        const std::uint16_t v = u16();
        if (v != kFormatVersion)
            fail(ErrorKind::Format, std::string(what_) + ": unsupported version " + std::to_string(v));
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n)
            fail(ErrorKind::Format, std::string(what_) + ": truncated at byte offset " + std::to_string(pos_));
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    const char* what_;
};

std::uint16_t checked_u16(int v, const char* field) {
    if (v < 0 || v > std::numeric_limits<std::uint16_t>::max())
        fail(ErrorKind::Format, std::string(field) + " does not fit in 16 bits");
    return static_cast<std::uint16_t>(v);
}

} // namespace

std::vector<std::uint8_t> serialize_tensor(const SparseEncoding& s) {
    s.validate();
    const SparseEncoding canonical = s.order == TraversalOrder::ChannelGroupMajor
                                         ? s
                                         : encode_sparse(decode_sparse(s), TraversalOrder::ChannelGroupMajor);
    Writer w;
    w.magic("TBNT");
    w.u16(kFormatVersion);
    w.u16(checked_u16(s.shape.height, "height"));
    w.u16(checked_u16(s.shape.width, "width"));
    w.u16(checked_u16(s.shape.channels, "channels"));
    w.raw(canonical.map_bits.to_bytes());
    w.raw(canonical.value_bits.to_bytes());
    return w.take();
}

SparseEncoding deserialize_tensor(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "TBNT");
    r.magic("TBNT");
    r.version();
    SparseEncoding s;
    s.shape.height = r.u16();
    s.shape.width = r.u16();
    s.shape.channels = r.u16();
    require(s.shape.valid(), ErrorKind::Format, "TBNT: zero dimension");
    const std::size_t n = s.shape.elements();
    s.map_bits = BitVector::from_bytes(r.raw((n + 7) / 8), n);
    const std::size_t nnz = s.map_bits.popcount();
    s.value_bits = BitVector::from_bytes(r.raw((nnz + 7) / 8), nnz);
    require(r.remaining() == 0, ErrorKind::Format, "TBNT: trailing bytes after value stream");
    return s;
}

std::vector<std::uint8_t> serialize_weights(const BinaryWeightTensor& wt) {
    require(wt.kernel_h() <= 255 && wt.kernel_w() <= 255, ErrorKind::Format, "TBNW: kernel too large");
    Writer w;
    w.magic("TBNW");
    w.u16(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(wt.kernel_h()));
    w.u8(static_cast<std::uint8_t>(wt.kernel_w()));
    w.u16(checked_u16(wt.in_channels(), "in_channels"));
    w.u16(checked_u16(wt.out_channels(), "out_channels"));
    w.raw(wt.bits().to_bytes());
    return w.take();
}

BinaryWeightTensor deserialize_weights(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "TBNW");
    r.magic("TBNW");
    r.version();
    const int kh = r.u8();
    const int kw = r.u8();
    const int in = r.u16();
    const int out = r.u16();
    require(kh > 0 && kw > 0 && in > 0 && out > 0, ErrorKind::Format, "TBNW: zero dimension");
    const std::size_t n = static_cast<std::size_t>(kh) * kw * in * out;
    BitVector bits = BitVector::from_bytes(r.raw((n + 7) / 8), n);
    require(r.remaining() == 0, ErrorKind::Format, "TBNW: trailing bytes after weight payload");
    return BinaryWeightTensor(kh, kw, in, out, std::move(bits));
}

std::vector<std::uint8_t> serialize_params(std::span<const std::int16_t> values, int channels) {
    Writer w;
    w.magic("TBNP");
    w.u16(kFormatVersion);
    w.u16(checked_u16(channels, "channels"));
    for (std::int16_t v : values) w.u16(static_cast<std::uint16_t>(v));
    return w.take();
}

std::vector<std::int16_t> deserialize_params(std::span<const std::uint8_t> bytes, int values_per_channel) {
    Reader r(bytes, "TBNP");
    r.magic("TBNP");
    r.version();
    const int channels = r.u16();
    const std::size_t count = static_cast<std::size_t>(channels) * values_per_channel;
    require(r.remaining() == 2 * count, ErrorKind::Format,
            "TBNP: payload holds " + std::to_string(r.remaining() / 2) + " values, expected " + std::to_string(count));
    std::vector<std::int16_t> out(count);
    for (auto& v : out) v = static_cast<std::int16_t>(r.u16());
    return out;
}

std::vector<std::uint8_t> serialize_archive(std::span<const ArchiveEntry> entries) {
    std::vector<std::vector<std::uint8_t>> blobs;
    blobs.reserve(entries.size());
    for (const auto& e : entries) blobs.push_back(serialize_tensor(e.tensor));

    constexpr std::size_t kHeader = 12;
    constexpr std::size_t kIndexEntry = 16;
    Writer w;
    w.magic("TBNA");
    w.u16(kFormatVersion);
    w.u16(0);
    w.u32(static_cast<std::uint32_t>(entries.size()));
    std::uint64_t offset = kHeader + kIndexEntry * entries.size();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        w.u64(offset);
        w.u32(static_cast<std::uint32_t>(blobs[i].size()));
        w.u8(entries[i].label ? 1 : 0);
        w.u8(entries[i].label.value_or(0));
        w.u16(0);
        offset += blobs[i].size();
    }
    for (const auto& b : blobs) w.raw(b);
    return w.take();
}

std::vector<ArchiveEntry> deserialize_archive(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "TBNA");
    r.magic("TBNA");
    r.version();
    r.u16();
    const std::uint32_t count = r.u32();
    require(std::uint64_t{count} * 16 <= r.remaining(), ErrorKind::Format,
            "TBNA: index of " + std::to_string(count) + " entries is truncated");
    std::vector<ArchiveEntry> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint64_t offset = r.u64();
        const std::uint32_t size = r.u32();
        const bool has_label = r.u8() != 0;
        const std::uint8_t label = r.u8();
        r.u16();
        require(offset <= bytes.size() && size <= bytes.size() - offset, ErrorKind::Format,
                "TBNA: entry " + std::to_string(i) + " points past end of archive");
        ArchiveEntry e;
        e.tensor = deserialize_tensor(bytes.subspan(offset, size));
        if (has_label) e.label = label;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Format, "cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Format, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace tbn::io
