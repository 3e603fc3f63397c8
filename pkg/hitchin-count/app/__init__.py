# hitchin-count application package
