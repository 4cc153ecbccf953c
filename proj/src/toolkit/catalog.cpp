#include "ttx/definition/parser.hpp"
#include "ttx/toolkit/toolkit.hpp"

namespace ttx::toolkit {

using definition::EffectKind;
using definition::ToolArgument;
using definition::ToolEffect;
using definition::ToolSpec;

namespace {

ToolArgument Arg(std::string name, std::string_view pattern, bool required = true) {
  return {std::move(name), std::string(pattern), required};
}

ToolEffect Effect(EffectKind kind, std::string argument, std::string not_found = {}) {
  ToolEffect effect;
  effect.kind = kind;
  effect.argument = std::move(argument);
  effect.not_found = std::move(not_found);
  return effect;
}

}  // namespace

std::vector<ToolSpec> BuiltinCatalog() {
  std::vector<ToolSpec> catalog;

  catalog.push_back({"block_traffic_from", "Block incoming traffic",
                     "Drop all traffic arriving from an IPv4 address at the perimeter firewall.",
                     {Arg("ip", kIpv4Pattern)},
                     "Incoming traffic from {{ip}} is now blocked.",
                     Effect(EffectKind::kRecordBlock, "ip"),
                     {}});

  catalog.push_back({"block_traffic_to", "Block outgoing traffic",
                     "Drop all traffic leaving the network towards an IPv4 address.",
                     {Arg("ip", kIpv4Pattern)},
                     "Outgoing traffic to {{ip}} is now blocked.",
                     Effect(EffectKind::kRecordBlock, "ip"),
                     {}});

  catalog.push_back({"dns_lookup", "DNS lookup",
                     "Resolve a domain name (not a URL) to its address records.",
                     {Arg("domain", kDomainPattern)},
                     "{{domain}} has address {{result}}",
                     Effect(EffectKind::kReturnLookup, "domain", "NXDOMAIN"),
                     {}});

  catalog.push_back({"reverse_dns_lookup", "Reverse DNS lookup",
                     "Find the host name registered for an IPv4 address.",
                     {Arg("ip", kIpv4Pattern)},
                     "{{ip}} points to {{result}}",
                     Effect(EffectKind::kReturnLookup, "ip", "no PTR record"),
                     {}});

  catalog.push_back({"whois", "WHOIS",
                     "Registration data for a domain name.",
                     {Arg("domain", kDomainPattern)},
                     "{{result}}",
                     Effect(EffectKind::kReturnLookup, "domain", "No match for {{domain}}."),
                     {}});

  catalog.push_back({"inspect_network_traffic", "Inspect network traffic",
                     "Summarise captured flows involving an IPv4 address.",
                     {Arg("ip", kIpv4Pattern)},
                     "Traffic summary for {{ip}}:\n{{result}}",
                     Effect(EffectKind::kReturnLookup, "ip",
                            "No traffic recorded for this address."),
                     {}});

  catalog.push_back({"browser", "Browser",
                     "Open an in-exercise web page.",
                     {Arg("url", kUrlPattern)},
                     "",
                     Effect(EffectKind::kReturnPage, "url"),
                     {}});

  catalog.push_back({"password_reset", "Password reset",
                     "Force a password reset for a user account.",
                     {Arg("account", kAccountPattern)},
                     "Password for {{account}} has been reset; a new one must be set at next "
                     "login.",
                     {},
                     {}});

  catalog.push_back({"disable_account", "Disable account",
                     "Suspend a user account until further notice.",
                     {Arg("account", kAccountPattern)},
                     "Account {{account}} is disabled.",
                     {},
                     {}});

  catalog.push_back(
      {"notify_authority", "Notify authority",
       "File a formal incident notification with an external or internal authority.",
       {Arg("authority", "national_csirt|data_protection_authority|police|university_management"),
        Arg("reference", R"([^\n]{1,200})", false)},
       "Notification sent to {{authority}}. Reference: {{reference}}",
       {},
       {}});

  catalog.push_back({"restore_backup", "Restore backup",
                     "Restore a server from a dated backup snapshot.",
                     {Arg("server", kDomainPattern), Arg("snapshot", R"([0-9]{4}-[0-9]{2}-[0-9]{2})")},
                     "Restore of {{server}} from snapshot {{snapshot}} started.",
                     {},
                     {}});

  return catalog;
}

std::string SerializeCatalog() {
  definition::ExerciseDefinition holder;
  holder.name = "Builtin tool catalog";
  holder.duration_minutes = 1;
  holder.tools = BuiltinCatalog();
  return definition::SerializeDefinition(holder);
}

}  // namespace ttx::toolkit
