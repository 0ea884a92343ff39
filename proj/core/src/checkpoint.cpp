#include "wildfire/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace wildfire::io {
namespace {

const char* kMagic = "wildfire-checkpoint";

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

[[noreturn]] void bad(const std::string& what) {
    throw IntegrityError("checkpoint: " + what);
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ostringstream manifest;
    manifest << kMagic << " " << c.version << "\n";
    manifest << "kind " << c.kind << "\n";
    manifest << "seed " << c.seed << "\n";
    manifest << "digest " << std::hex << c.log_digest << std::dec << "\n";
    for (const auto& [key, value] : c.config)
        manifest << "config " << key << " " << value << "\n";
    for (const nn::NamedTensor& t : c.tensors) {
        manifest << "tensor " << t.name << " " << t.tensor.ndim();
        for (int i = 0; i < t.tensor.ndim(); ++i) manifest << " " << t.tensor.dim(i);
        manifest << "\n";
    }
    manifest << "end\n";

    std::string blob = manifest.str();
    for (const nn::NamedTensor& t : c.tensors) {
        for (double v : t.tensor.values()) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            append_u64_le(blob, bits);
        }
    }
    append_u64_le(blob, fnv1a64(blob.data(), blob.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw DataError("short write on checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path);
    std::string blob((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    if (blob.size() < 8) bad("file too short at " + path);

    const std::uint64_t stored =
        read_u64_le(reinterpret_cast<const unsigned char*>(blob.data()) + blob.size() - 8);
    if (stored != fnv1a64(blob.data(), blob.size() - 8))
        bad("checksum mismatch in " + path);

    const std::size_t header_end = blob.find("\nend\n");
    if (header_end == std::string::npos) bad("manifest has no end marker in " + path);
    std::istringstream manifest(blob.substr(0, header_end + 1));

    Checkpoint c;
    std::string line;
    if (!std::getline(manifest, line)) bad("empty manifest");
    {
        std::istringstream head(line);
        std::string magic;
        head >> magic >> c.version;
        if (magic != kMagic) bad("not a checkpoint file: " + path);
        if (c.version != 1)
            bad("unsupported format version " + std::to_string(c.version));
    }
    std::size_t total_values = 0;
    while (std::getline(manifest, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "kind") {
            ls >> c.kind;
        } else if (tag == "seed") {
            ls >> c.seed;
        } else if (tag == "digest") {
            ls >> std::hex >> c.log_digest >> std::dec;
        } else if (tag == "config") {
            std::string key, value;
            ls >> key;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            c.config[key] = value;
        } else if (tag == "tensor") {
            std::string name;
            int ndim = 0;
            ls >> name >> ndim;
            if (name.empty() || ndim < 0 || ndim > 8) bad("bad tensor line: " + line);
            Shape shape(ndim);
            for (int i = 0; i < ndim; ++i) {
                if (!(ls >> shape[i]) || shape[i] <= 0) bad("bad tensor shape: " + line);
            }
            nn::NamedTensor t;
            t.name = name;
            t.tensor = Tensor(shape);
            total_values += t.tensor.size();
            c.tensors.push_back(std::move(t));
        } else if (!tag.empty()) {
            bad("unknown manifest entry '" + tag + "'");
        }
        if (ls.bad()) bad("malformed manifest line: " + line);
    }
    if (c.kind.empty()) bad("manifest has no kind");

    const std::size_t data_at = header_end + 5;  // past "\nend\n"
    if (blob.size() - 8 - data_at != total_values * 8)
        bad("manifest declares " + std::to_string(total_values) +
            " values but the file carries " +
            std::to_string((blob.size() - 8 - data_at) / 8));
    const unsigned char* p =
        reinterpret_cast<const unsigned char*>(blob.data()) + data_at;
    for (nn::NamedTensor& t : c.tensors) {
        auto dst = t.tensor.values();
        for (std::size_t i = 0; i < dst.size(); ++i, p += 8) {
            const std::uint64_t bits = read_u64_le(p);
            std::memcpy(&dst[i], &bits, 8);
        }
    }
    return c;
}

}  // namespace wildfire::io
