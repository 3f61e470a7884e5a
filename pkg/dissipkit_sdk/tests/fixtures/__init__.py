"""Reusable sample builders for the dissipkit test suite"""
