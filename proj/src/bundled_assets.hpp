// rwvote - bundled data assets compiled into the library

#ifndef RWVOTE_BUNDLED_ASSETS_HPP
#define RWVOTE_BUNDLED_ASSETS_HPP

#include <string_view>

namespace rwvote::assets {

std::string_view signatures_json();
std::string_view api_names_txt();
std::string_view keywords_json();
std::string_view control_curve_json();
std::string_view wordlist_txt();

} // namespace rwvote::assets

#endif // RWVOTE_BUNDLED_ASSETS_HPP
