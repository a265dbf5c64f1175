# geolab - cut-locus order laboratory for nonpositively curved quotients
