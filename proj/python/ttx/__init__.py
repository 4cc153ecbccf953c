"""Python bindings for the tabletop exercise engine."""

try:
    from . import _ttx
except ImportError:  # build tree: the extension sits next to, not inside, the package
    import _ttx

TtxError = _ttx.TtxError
validate = _ttx.validate
normalize = _ttx.normalize
simulate = _ttx.simulate
report = _ttx.report
completion_ratio = _ttx.completion_ratio
rounded_percent = _ttx.rounded_percent
timing_stats = _ttx.timing_stats
tool_catalog = _ttx.tool_catalog
format_timestamp = _ttx.format_timestamp
parse_timestamp = _ttx.parse_timestamp

STREAM_FILES = (
    "inject_categories.jsonl",
    "emails.jsonl",
    "action_logs.jsonl",
    "milestones.jsonl",
)

__all__ = [
    "TtxError",
    "validate",
    "normalize",
    "simulate",
    "report",
    "completion_ratio",
    "rounded_percent",
    "timing_stats",
    "tool_catalog",
    "format_timestamp",
    "parse_timestamp",
    "STREAM_FILES",
]
