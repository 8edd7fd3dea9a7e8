#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace claimex {

/// One decoded image attachment. `bytes` holds the raw encoded image
/// (PNG/JPEG/...), never pixel data; the harness attaches, it does not decode.
struct ImagePayload {
    std::string source_ref;  // original path or URL from the dataset
    std::string media_type;  // sniffed from magic bytes
    std::string bytes;

    bool operator==(const ImagePayload&) const = default;
};

/// Magic-byte sniffing for the common web image containers. Unknown content
/// falls back to application/octet-stream.
std::string sniff_media_type(std::string_view bytes);

bool is_url(std::string_view ref);

/// Maps an image reference to its payload. Throws Error(image_access) when
/// the reference cannot be resolved.
using ImageLoader = std::function<ImagePayload(const std::string& ref)>;

/// Loader for local files only; URL references are an image_access error.
/// This is the loader replay mode uses.
ImageLoader file_image_loader();

/// Loader that reads local files and fetches http(s) references with the
/// supplied getter (live mode).
using UrlFetcher = std::function<std::string(const std::string& url)>;
ImageLoader fetching_image_loader(UrlFetcher fetch);

struct LoadedImages {
    std::vector<ImagePayload> images;    // successfully loaded, in ref order
    std::vector<std::string> warnings;   // one entry per dropped ref
};

/// Loads every reference, dropping unreadable ones with a warning.
/// Throws Error(image_access) only when refs is non-empty and all fail.
LoadedImages load_images(const std::vector<std::string>& refs, const ImageLoader& loader);

}  // namespace claimex
