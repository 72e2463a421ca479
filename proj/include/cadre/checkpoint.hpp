#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "cadre/binio.hpp"
#include "cadre/network.hpp"

// Checkpoint container: magic "CADN", format version, the NetworkConfig,
// then every registry entry as (name length, name bytes, rank, extents, raw
// little-endian doubles) in registry order. Because doubles travel as bit
// patterns, a save/load round trip reproduces the network bit for bit.

namespace cadre {

inline constexpr char kCheckpointMagic[4] = {'C', 'A', 'D', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_network_config(std::ostream& os, const NetworkConfig& c) {
    write_u32(os, static_cast<std::uint32_t>(c.in_channels));
    write_u32(os, static_cast<std::uint32_t>(c.frames));
    write_u32(os, static_cast<std::uint32_t>(c.height));
    write_u32(os, static_cast<std::uint32_t>(c.width));
    write_u32(os, static_cast<std::uint32_t>(c.conv_channels.size()));
    for (std::size_t i = 0; i < c.conv_channels.size(); ++i) {
        write_u32(os, static_cast<std::uint32_t>(c.conv_channels[i]));
        for (int k : c.conv_kernels[i]) write_u32(os, static_cast<std::uint32_t>(k));
    }
    write_u32(os, static_cast<std::uint32_t>(c.pool_after.size()));
    for (int idx : c.pool_after) write_u32(os, static_cast<std::uint32_t>(idx));
    for (int w : c.pool_window) write_u32(os, static_cast<std::uint32_t>(w));
    write_u32(os, static_cast<std::uint32_t>(c.head_hidden1));
    write_u32(os, static_cast<std::uint32_t>(c.head_hidden2));
    write_u32(os, static_cast<std::uint32_t>(c.fusion_width));
    write_u32(os, static_cast<std::uint32_t>(c.fused_units));
    write_u32(os, static_cast<std::uint32_t>(c.detector_hidden));
}

inline NetworkConfig read_network_config(std::istream& is) {
    NetworkConfig c;
    c.in_channels = static_cast<int>(read_u32(is, "config in_channels"));
    c.frames = static_cast<int>(read_u32(is, "config frames"));
    c.height = static_cast<int>(read_u32(is, "config height"));
    c.width = static_cast<int>(read_u32(is, "config width"));
    const std::uint32_t n_conv = read_u32(is, "config conv layer count");
    if (n_conv == 0 || n_conv > 64) throw IOError("checkpoint: implausible conv layer count");
    c.conv_channels.assign(n_conv, 0);
    c.conv_kernels.assign(n_conv, {1, 1, 1});
    for (std::uint32_t i = 0; i < n_conv; ++i) {
        c.conv_channels[i] = static_cast<int>(read_u32(is, "config conv channels"));
        for (int ax = 0; ax < 3; ++ax)
            c.conv_kernels[i][static_cast<std::size_t>(ax)] =
                static_cast<int>(read_u32(is, "config conv kernel"));
    }
    const std::uint32_t n_pool = read_u32(is, "config pool count");
    if (n_pool > n_conv) throw IOError("checkpoint: implausible pool count");
    c.pool_after.assign(n_pool, 0);
    for (std::uint32_t i = 0; i < n_pool; ++i)
        c.pool_after[i] = static_cast<int>(read_u32(is, "config pool index"));
    for (int ax = 0; ax < 3; ++ax)
        c.pool_window[static_cast<std::size_t>(ax)] =
            static_cast<int>(read_u32(is, "config pool window"));
    c.head_hidden1 = static_cast<int>(read_u32(is, "config head_hidden1"));
    c.head_hidden2 = static_cast<int>(read_u32(is, "config head_hidden2"));
    c.fusion_width = static_cast<int>(read_u32(is, "config fusion_width"));
    c.fused_units = static_cast<int>(read_u32(is, "config fused_units"));
    c.detector_hidden = static_cast<int>(read_u32(is, "config detector_hidden"));
    return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const Network& net) {
    atomic_write_file(path, [&net](std::ostream& os) {
        write_magic(os, kCheckpointMagic);
        write_u32(os, kCheckpointVersion);
        write_network_config(os, net.config);
        auto registry = param_registry(net);
        write_u32(os, static_cast<std::uint32_t>(registry.size()));
        for (const auto& p : registry) {
            write_u32(os, static_cast<std::uint32_t>(p.name.size()));
            os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
            const Shape& s = p.tensor->shape();
            write_u32(os, static_cast<std::uint32_t>(s.rank()));
            for (int e : s.dims) write_u32(os, static_cast<std::uint32_t>(e));
            for (std::size_t i = 0; i < p.tensor->size(); ++i) write_f64(os, (*p.tensor)[i]);
        }
    });
}

inline Network load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IOError("cannot open checkpoint " + path.string());
    expect_magic(is, kCheckpointMagic, "checkpoint");
    const std::uint32_t version = read_u32(is, "checkpoint version");
    if (version != kCheckpointVersion)
        throw IOError("unsupported checkpoint version " + std::to_string(version));
    NetworkConfig config = read_network_config(is);

    Network net = make_network(config, 0);  // allocation only; data overwritten below
    auto registry = param_registry(net);
    const std::uint32_t n_entries = read_u32(is, "checkpoint entry count");
    if (n_entries != registry.size())
        throw IOError("checkpoint holds " + std::to_string(n_entries) + " tensors, config needs " +
                      std::to_string(registry.size()));
    for (auto& p : registry) {
        const std::uint32_t name_len = read_u32(is, "entry name length");
        if (name_len > 4096) throw IOError("checkpoint: implausible entry name length");
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw IOError("truncated file while reading entry name");
        if (name != p.name)
            throw IOError("checkpoint entry '" + name + "' does not match expected '" + p.name + "'");
        const std::uint32_t rank = read_u32(is, "entry rank");
        if (static_cast<int>(rank) != p.tensor->shape().rank())
            throw IOError("checkpoint entry '" + name + "' rank mismatch");
        for (std::size_t ax = 0; ax < rank; ++ax) {
            const std::uint32_t e = read_u32(is, "entry extent");
            if (static_cast<int>(e) != p.tensor->shape()[static_cast<int>(ax)])
                throw IOError("checkpoint entry '" + name + "' extent mismatch");
        }
        for (std::size_t i = 0; i < p.tensor->size(); ++i)
            (*p.tensor)[i] = read_f64(is, "entry data");
    }
    // Anything after the last entry means the file was not written by this
    // format; reject rather than silently ignore.
    if (is.peek() != std::ifstream::traits_type::eof())
        throw IOError("checkpoint " + path.string() + " has trailing bytes");
    return net;
}

}  // namespace cadre
