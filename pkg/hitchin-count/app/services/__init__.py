# hitchin-count services: root data, polytopes, weights, adelic counts
