"""p-adic arithmetic differential equations on q-series."""
