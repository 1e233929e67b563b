"""Tools: JSON payloads, CSV export and the acceptance suite."""
