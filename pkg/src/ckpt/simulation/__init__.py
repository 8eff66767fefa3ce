"""Interval-granularity simulation of intermittent execution."""
