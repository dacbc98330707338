"""Sleep coaching engine: wearable analytics, contextual-bandit activity
recommendations, behavior-change techniques, and a multi-agent chat pipeline
with pluggable language-model providers."""

__version__ = "0.1.0"
