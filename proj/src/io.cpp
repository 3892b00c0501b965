namespace bdd {}
