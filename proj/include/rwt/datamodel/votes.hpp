#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rwt/datamodel/types.hpp"

namespace rwt {

inline constexpr const char* kVotesCsvHeader =
    "worker_id,image_id,label,vote_time_s,batch";

std::vector<VoteRecord> read_votes(const std::filesystem::path& path);
std::vector<VoteRecord> parse_votes(const std::string& csv_text);
void write_votes(const std::filesystem::path& path,
                 const std::vector<VoteRecord>& votes);

// Groups votes by image_id; per-image order follows input order.
std::map<std::string, std::vector<VoteRecord>> group_by_image(
    const std::vector<VoteRecord>& votes);

}  // namespace rwt
