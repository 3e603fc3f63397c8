# hitchin-count core: configuration, logging, exceptions
