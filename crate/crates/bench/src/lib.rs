// benchmark-only package
