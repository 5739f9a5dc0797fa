#include "protoattn/envs.hpp"

#include <string>

#include "protoattn/dodgeroom.hpp"
#include "protoattn/errors.hpp"
#include "protoattn/followblob.hpp"
#include "protoattn/trackdrive.hpp"

namespace protoattn {

std::string_view env_name(EnvId id) {
  switch (id) {
    case EnvId::FollowBlob: return "followblob";
    case EnvId::TrackDrive: return "trackdrive";
    case EnvId::DodgeRoom: return "dodgeroom";
  }
  return "unknown";
}

EnvId parse_env_id(std::string_view name) {
  for (auto id : {EnvId::FollowBlob, EnvId::TrackDrive, EnvId::DodgeRoom})
    if (env_name(id) == name) return id;
  throw ConfigError("unknown environment '" + std::string(name) + "' (expected followblob, trackdrive or dodgeroom)");
}

std::unique_ptr<Environment> make_env(EnvId id) {
  switch (id) {
    case EnvId::FollowBlob: return std::make_unique<FollowBlob>();
    case EnvId::TrackDrive: return std::make_unique<TrackDrive>();
    case EnvId::DodgeRoom: return std::make_unique<DodgeRoom>();
  }
  throw ConfigError("unknown environment id");
}

}  // namespace protoattn
