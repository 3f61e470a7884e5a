"""Preset experiment launcher for dissipkit"""
