#include "csisense/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "csisense/errors.hpp"

namespace csisense {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'N', 'W'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}
    template <typename T>
    T get(const char* what) {
        char buf[sizeof(T)];
        in_.read(buf, sizeof(T));
        if (in_.gcount() != static_cast<std::streamsize>(sizeof(T)))
            throw ParseError(std::string("truncated checkpoint while reading ") + what, offset_);
        offset_ += sizeof(T);
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }
    void get_raw(char* dst, size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw ParseError(std::string("truncated checkpoint while reading ") + what, offset_);
        offset_ += static_cast<long long>(n);
    }
    long long offset() const { return offset_; }

private:
    std::istream& in_;
    long long offset_ = 0;
};

void put_name(std::ostream& out, const std::string& name) {
    put(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
}

template <typename T>
void put_tensor_data(std::ostream& out, const TensorT<T>& t) {
    put(out, static_cast<uint32_t>(t.dim()));
    for (int i = 0; i < t.dim(); ++i) put(out, static_cast<uint32_t>(t.extent(i)));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(static_cast<size_t>(t.numel()) * sizeof(T)));
}

template <typename T>
TensorT<T> get_tensor_data(Reader& r) {
    uint32_t ndim = r.get<uint32_t>("tensor rank");
    if (ndim > 8) throw ParseError("implausible tensor rank", r.offset());
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(r.get<uint32_t>("tensor extent"));
    TensorT<T> t(shape);
    r.get_raw(reinterpret_cast<char*>(t.data()), static_cast<size_t>(t.numel()) * sizeof(T),
              "tensor data");
    return t;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors,
                     const OptimizerSnapshot& optimizer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for write: " + path);
    out.write(kMagic, 4);
    put(out, kVersion);
    put(out, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        put_name(out, name);
        put_tensor_data(out, *t);
    }
    put(out, static_cast<uint8_t>(optimizer.present ? 1 : 0));
    if (optimizer.present) {
        put(out, static_cast<uint64_t>(optimizer.step_count));
        put(out, static_cast<uint32_t>(optimizer.moments.size()));
        for (const auto& [m, v] : optimizer.moments) {
            put_tensor_data(out, m);
            put_tensor_data(out, v);
        }
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& e : tensors) {
        if (e.name == name) return &e.tensor;
    }
    return nullptr;
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    Reader r(in);
    char magic[4];
    r.get_raw(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("bad magic, not a model checkpoint", 0);
    uint32_t version = r.get<uint32_t>("version");
    if (version != kVersion)
        throw ParseError("unsupported checkpoint version " + std::to_string(version), r.offset());
    uint32_t count = r.get<uint32_t>("tensor count");
    Checkpoint ckpt;
    ckpt.tensors.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t len = r.get<uint32_t>("name length");
        if (len > 4096) throw ParseError("implausible tensor name length", r.offset());
        std::string name(len, '\0');
        r.get_raw(name.data(), len, "tensor name");
        ckpt.tensors.push_back({std::move(name), get_tensor_data<float>(r)});
    }
    uint8_t has_opt = r.get<uint8_t>("optimizer flag");
    if (has_opt) {
        ckpt.optimizer.present = true;
        ckpt.optimizer.step_count = static_cast<int64_t>(r.get<uint64_t>("optimizer step"));
        uint32_t n = r.get<uint32_t>("optimizer entry count");
        ckpt.optimizer.moments.reserve(n);
        for (uint32_t i = 0; i < n; ++i) {
            auto m = get_tensor_data<double>(r);
            auto v = get_tensor_data<double>(r);
            ckpt.optimizer.moments.emplace_back(std::move(m), std::move(v));
        }
    }
    return ckpt;
}

}  // namespace csisense
