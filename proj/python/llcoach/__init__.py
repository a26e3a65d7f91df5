"""Python bindings for the LLCoach offline pipeline."""

try:
    from llcoach import _llcoach as _ext
except ImportError:  # development build: the extension sits outside the package
    import _llcoach as _ext

Error = _ext.Error
auto_parallelize = _ext.auto_parallelize
evaluate = _ext.evaluate
generate_replay = _ext.generate_replay
parse_plan = _ext.parse_plan
simulate = _ext.simulate
validate = _ext.validate

__all__ = [
    "Error",
    "auto_parallelize",
    "evaluate",
    "generate_replay",
    "parse_plan",
    "simulate",
    "validate",
]
