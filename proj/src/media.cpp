#include "claimex/media.hpp"

#include "claimex/error.hpp"
#include "claimex/util.hpp"

namespace claimex {

std::string sniff_media_type(std::string_view bytes) {
    auto has = [&](size_t offset, std::string_view magic) {
        return bytes.size() >= offset + magic.size() &&
               bytes.substr(offset, magic.size()) == magic;
    };
    if (has(0, "\x89PNG\r\n\x1a\n")) return "image/png";
    if (has(0, "\xFF\xD8\xFF")) return "image/jpeg";
    if (has(0, "GIF87a") || has(0, "GIF89a")) return "image/gif";
    if (has(0, "RIFF") && has(8, "WEBP")) return "image/webp";
    if (has(0, "BM")) return "image/bmp";
    return "application/octet-stream";
}

bool is_url(std::string_view ref) {
    return starts_with(ref, "http://") || starts_with(ref, "https://");
}

namespace {

ImagePayload payload_from_bytes(const std::string& ref, std::string bytes) {
    ImagePayload p;
    p.source_ref = ref;
    p.media_type = sniff_media_type(bytes);
    p.bytes = std::move(bytes);
    return p;
}

ImagePayload load_local(const std::string& ref) {
    try {
        return payload_from_bytes(ref, read_binary_file(ref));
    } catch (const Error&) {
        fail(ErrorKind::image_access, "image unreadable: " + ref);
    }
}

}  // namespace

ImageLoader file_image_loader() {
    return [](const std::string& ref) -> ImagePayload {
        if (is_url(ref)) {
            fail(ErrorKind::image_access,
                 "image reference is a URL and no fetcher is configured: " + ref);
        }
        return load_local(ref);
    };
}

ImageLoader fetching_image_loader(UrlFetcher fetch) {
    return [fetch = std::move(fetch)](const std::string& ref) -> ImagePayload {
        if (!is_url(ref)) return load_local(ref);
        try {
            return payload_from_bytes(ref, fetch(ref));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            fail(ErrorKind::image_access, "image fetch failed: " + ref + ": " + e.what());
        }
    };
}

LoadedImages load_images(const std::vector<std::string>& refs, const ImageLoader& loader) {
    LoadedImages out;
    for (const std::string& ref : refs) {
        try {
            out.images.push_back(loader(ref));
        } catch (const Error& e) {
            out.warnings.push_back(e.what());
        }
    }
    if (!refs.empty() && out.images.empty()) {
        fail(ErrorKind::image_access,
             "no readable images among " + std::to_string(refs.size()) + " reference(s)");
    }
    return out;
}

}  // namespace claimex
