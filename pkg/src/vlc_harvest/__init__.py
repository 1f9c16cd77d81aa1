"""Hybrid optical/RF relay link simulator and rate optimizer."""
