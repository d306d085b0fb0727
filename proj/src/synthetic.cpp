#include "icsu/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>

#include "icsu/error.hpp"
#include "icsu/util.hpp"

namespace icsu {

namespace {

struct EntityDef {
    const char* key;
    const char* name;
    const char* cls;
};

// clang-format off
const EntityDef kEntities[] = {
    {"alma_reyes", "Alma Reyes", "person"}, {"bruno_hartmann", "Bruno Hartmann", "person"},
    {"clara_voss", "Clara Voss", "person"}, {"dmitri_sokolov", "Dmitri Sokolov", "person"},
    {"elena_marsh", "Elena Marsh", "person"}, {"farid_haddad", "Farid Haddad", "person"},
    {"greta_lindqvist", "Greta Lindqvist", "person"}, {"hugo_brandt", "Hugo Brandt", "person"},
    {"ines_carvalho", "Ines Carvalho", "person"}, {"jonah_whitfield", "Jonah Whitfield", "person"},
    {"keiko_tanaka", "Keiko Tanaka", "person"}, {"luca_romano", "Luca Romano", "person"},
    {"maya_okafor", "Maya Okafor", "person"}, {"nils_berg", "Nils Berg", "person"},
    {"olivia_grant", "Olivia Grant", "person"}, {"pavel_novak", "Pavel Novak", "person"},

    {"glass_harbor", "The Glass Harbor", "film"}, {"midnight_in_valdora", "Midnight in Valdora", "film"},
    {"copper_skies", "Copper Skies", "film"}, {"last_lighthouse_keeper", "The Last Lighthouse Keeper", "film"},
    {"rhinestone_avenue", "Rhinestone Avenue", "film"}, {"winter_without_birds", "A Winter Without Birds", "film"},
    {"paper_crowns", "Paper Crowns", "film"}, {"echoes_of_brennholm", "Echoes of Brennholm", "film"},

    {"salt_archive", "The Salt Archive", "book"}, {"river_of_small_lamps", "River of Small Lamps", "book"},
    {"iron_and_ivy", "Iron and Ivy", "book"}, {"map_for_the_lost", "A Map for the Lost", "book"},

    {"neon_tides", "Neon Tides", "album"}, {"quiet_machines", "Quiet Machines", "album"},
    {"ember_season", "Ember Season", "album"},
    {"glasslights", "The Glasslights", "band"}, {"northern_mile", "Northern Mile", "band"},

    {"port_alder", "Port Alder", "city"}, {"brennholm", "Brennholm", "city"}, {"cassel_bay", "Cassel Bay", "city"},
    {"dunmore", "Dunmore", "city"}, {"elmsgate", "Elmsgate", "city"}, {"ferrovia", "Ferrovia", "city"},
    {"norland", "Norland", "country"}, {"valdoria", "Valdoria", "country"}, {"estmark", "Estmark", "country"},
    {"ostravia", "Ostravia", "country"},

    {"silverline_pictures", "Silverline Pictures", "company"}, {"northwind_studios", "Northwind Studios", "company"},
    {"apex_publishing", "Apex Publishing", "company"}, {"harbor_house_books", "Harbor House Books", "company"},
    {"bluestone_records", "Bluestone Records", "company"},
    {"university_of_port_alder", "University of Port Alder", "university"},
    {"brennholm_institute", "Brennholm Institute of Technology", "university"},

    {"drama", "drama", "genre"}, {"comedy", "comedy", "genre"}, {"science_fiction", "science fiction", "genre"},
    {"norlandic", "Norlandic", "language"}, {"valdorian", "Valdorian", "language"},
    {"estmarkish", "Estmarkish", "language"},
    {"golden_anchor", "Golden Anchor Award", "award"}, {"silver_compass", "Silver Compass Prize", "award"},
    {"actor", "actor", "occupation"}, {"film_director", "film director", "occupation"},
    {"novelist", "novelist", "occupation"}, {"musician", "musician", "occupation"},
    {"aurelia", "Aurelia", "continent"}, {"borealis", "Borealis", "continent"},
    {"norland_crown", "Norland crown", "currency"}, {"valdorian_mark", "Valdorian mark", "currency"},
    {"estmark_florin", "Estmark florin", "currency"},
    {"seafaring", "seafaring", "topic"}, {"memory", "memory", "topic"},
    {"film_production", "film production", "industry"}, {"publishing", "publishing", "industry"},
    {"music", "music", "industry"},
};

struct FactDef {
    const char* s;
    const char* p;
    const char* o;  // an entity key, or a literal when no entity has that key
};

const FactDef kFacts[] = {
    {"glass_harbor", "directed_by", "alma_reyes"}, {"glass_harbor", "cast_member", "bruno_hartmann"},
    {"glass_harbor", "cast_member", "clara_voss"}, {"glass_harbor", "cast_member", "hugo_brandt"},
    {"glass_harbor", "screenwriter", "elena_marsh"}, {"glass_harbor", "composer", "keiko_tanaka"},
    {"glass_harbor", "publication_date", "1996-01-11"}, {"glass_harbor", "duration", "127"},
    {"glass_harbor", "genre", "drama"}, {"glass_harbor", "country_of_origin", "norland"},
    {"glass_harbor", "production_company", "silverline_pictures"}, {"glass_harbor", "original_language", "norlandic"},
    {"glass_harbor", "filming_location", "port_alder"}, {"glass_harbor", "award_received", "golden_anchor"},
    {"glass_harbor", "based_on", "salt_archive"},

    {"midnight_in_valdora", "directed_by", "dmitri_sokolov"}, {"midnight_in_valdora", "cast_member", "clara_voss"},
    {"midnight_in_valdora", "cast_member", "luca_romano"}, {"midnight_in_valdora", "screenwriter", "dmitri_sokolov"},
    {"midnight_in_valdora", "composer", "keiko_tanaka"}, {"midnight_in_valdora", "publication_date", "2003-05-20"},
    {"midnight_in_valdora", "duration", "98"}, {"midnight_in_valdora", "genre", "comedy"},
    {"midnight_in_valdora", "country_of_origin", "valdoria"},
    {"midnight_in_valdora", "production_company", "northwind_studios"},
    {"midnight_in_valdora", "original_language", "valdorian"}, {"midnight_in_valdora", "filming_location", "ferrovia"},

    {"copper_skies", "directed_by", "alma_reyes"}, {"copper_skies", "cast_member", "hugo_brandt"},
    {"copper_skies", "cast_member", "maya_okafor"}, {"copper_skies", "cast_member", "olivia_grant"},
    {"copper_skies", "screenwriter", "farid_haddad"}, {"copper_skies", "composer", "nils_berg"},
    {"copper_skies", "publication_date", "1988-11-02"}, {"copper_skies", "duration", "142"},
    {"copper_skies", "genre", "science_fiction"}, {"copper_skies", "country_of_origin", "norland"},
    {"copper_skies", "production_company", "silverline_pictures"}, {"copper_skies", "original_language", "norlandic"},
    {"copper_skies", "filming_location", "brennholm"}, {"copper_skies", "award_received", "silver_compass"},
    {"copper_skies", "award_received", "golden_anchor"},

    {"last_lighthouse_keeper", "directed_by", "greta_lindqvist"},
    {"last_lighthouse_keeper", "cast_member", "bruno_hartmann"},
    {"last_lighthouse_keeper", "cast_member", "maya_okafor"},
    {"last_lighthouse_keeper", "screenwriter", "greta_lindqvist"},
    {"last_lighthouse_keeper", "publication_date", "2011-09-14"}, {"last_lighthouse_keeper", "duration", "115"},
    {"last_lighthouse_keeper", "genre", "drama"}, {"last_lighthouse_keeper", "country_of_origin", "estmark"},
    {"last_lighthouse_keeper", "production_company", "northwind_studios"},
    {"last_lighthouse_keeper", "original_language", "estmarkish"},
    {"last_lighthouse_keeper", "filming_location", "cassel_bay"},
    {"last_lighthouse_keeper", "based_on", "river_of_small_lamps"},

    {"rhinestone_avenue", "directed_by", "hugo_brandt"}, {"rhinestone_avenue", "cast_member", "luca_romano"},
    {"rhinestone_avenue", "cast_member", "olivia_grant"}, {"rhinestone_avenue", "cast_member", "pavel_novak"},
    {"rhinestone_avenue", "composer", "nils_berg"}, {"rhinestone_avenue", "publication_date", "1984-06-29"},
    {"rhinestone_avenue", "duration", "111"}, {"rhinestone_avenue", "genre", "comedy"},
    {"rhinestone_avenue", "country_of_origin", "norland"},
    {"rhinestone_avenue", "production_company", "silverline_pictures"},
    {"rhinestone_avenue", "original_language", "norlandic"}, {"rhinestone_avenue", "filming_location", "dunmore"},

    {"winter_without_birds", "directed_by", "ines_carvalho"}, {"winter_without_birds", "cast_member", "clara_voss"},
    {"winter_without_birds", "cast_member", "pavel_novak"}, {"winter_without_birds", "screenwriter", "jonah_whitfield"},
    {"winter_without_birds", "publication_date", "2019-02-08"}, {"winter_without_birds", "duration", "134"},
    {"winter_without_birds", "genre", "drama"}, {"winter_without_birds", "country_of_origin", "ostravia"},
    {"winter_without_birds", "production_company", "northwind_studios"},
    {"winter_without_birds", "original_language", "valdorian"},
    {"winter_without_birds", "filming_location", "elmsgate"},
    {"winter_without_birds", "award_received", "silver_compass"},

    {"paper_crowns", "directed_by", "dmitri_sokolov"}, {"paper_crowns", "cast_member", "bruno_hartmann"},
    {"paper_crowns", "cast_member", "luca_romano"}, {"paper_crowns", "composer", "keiko_tanaka"},
    {"paper_crowns", "publication_date", "1999-12-03"}, {"paper_crowns", "duration", "89"},
    {"paper_crowns", "genre", "comedy"}, {"paper_crowns", "country_of_origin", "valdoria"},
    {"paper_crowns", "production_company", "northwind_studios"}, {"paper_crowns", "original_language", "valdorian"},
    {"paper_crowns", "filming_location", "ferrovia"},

    {"echoes_of_brennholm", "directed_by", "greta_lindqvist"}, {"echoes_of_brennholm", "cast_member", "hugo_brandt"},
    {"echoes_of_brennholm", "cast_member", "maya_okafor"}, {"echoes_of_brennholm", "screenwriter", "elena_marsh"},
    {"echoes_of_brennholm", "composer", "nils_berg"}, {"echoes_of_brennholm", "publication_date", "2007-04-17"},
    {"echoes_of_brennholm", "duration", "121"}, {"echoes_of_brennholm", "genre", "science_fiction"},
    {"echoes_of_brennholm", "country_of_origin", "estmark"},
    {"echoes_of_brennholm", "production_company", "silverline_pictures"},
    {"echoes_of_brennholm", "original_language", "estmarkish"},
    {"echoes_of_brennholm", "filming_location", "brennholm"}, {"echoes_of_brennholm", "based_on", "map_for_the_lost"},

    {"alma_reyes", "place_of_birth", "port_alder"}, {"alma_reyes", "date_of_birth", "1961-03-04"},
    {"alma_reyes", "country_of_citizenship", "norland"}, {"alma_reyes", "occupation", "film_director"},
    {"alma_reyes", "educated_at", "university_of_port_alder"}, {"alma_reyes", "height", "168"},
    {"bruno_hartmann", "place_of_birth", "brennholm"}, {"bruno_hartmann", "date_of_birth", "1970-07-21"},
    {"bruno_hartmann", "country_of_citizenship", "norland"}, {"bruno_hartmann", "occupation", "actor"},
    {"bruno_hartmann", "spouse", "clara_voss"}, {"bruno_hartmann", "height", "183"},
    {"clara_voss", "place_of_birth", "cassel_bay"}, {"clara_voss", "date_of_birth", "1972-01-30"},
    {"clara_voss", "country_of_citizenship", "estmark"}, {"clara_voss", "occupation", "actor"},
    {"clara_voss", "spouse", "bruno_hartmann"}, {"clara_voss", "height", "171"},
    {"dmitri_sokolov", "place_of_birth", "ferrovia"}, {"dmitri_sokolov", "date_of_birth", "1958-10-11"},
    {"dmitri_sokolov", "country_of_citizenship", "valdoria"}, {"dmitri_sokolov", "occupation", "film_director"},
    {"dmitri_sokolov", "educated_at", "brennholm_institute"},
    {"elena_marsh", "place_of_birth", "dunmore"}, {"elena_marsh", "date_of_birth", "1966-05-05"},
    {"elena_marsh", "country_of_citizenship", "norland"}, {"elena_marsh", "occupation", "novelist"},
    {"elena_marsh", "educated_at", "university_of_port_alder"},
    {"farid_haddad", "place_of_birth", "elmsgate"}, {"farid_haddad", "date_of_birth", "1975-12-12"},
    {"farid_haddad", "country_of_citizenship", "ostravia"}, {"farid_haddad", "occupation", "novelist"},
    {"greta_lindqvist", "place_of_birth", "cassel_bay"}, {"greta_lindqvist", "date_of_birth", "1969-08-08"},
    {"greta_lindqvist", "country_of_citizenship", "estmark"}, {"greta_lindqvist", "occupation", "film_director"},
    {"greta_lindqvist", "spouse", "nils_berg"},
    {"hugo_brandt", "place_of_birth", "port_alder"}, {"hugo_brandt", "date_of_birth", "1964-02-14"},
    {"hugo_brandt", "country_of_citizenship", "norland"}, {"hugo_brandt", "occupation", "actor"},
    {"hugo_brandt", "occupation", "film_director"}, {"hugo_brandt", "height", "177"},
    {"ines_carvalho", "place_of_birth", "ferrovia"}, {"ines_carvalho", "date_of_birth", "1980-09-09"},
    {"ines_carvalho", "country_of_citizenship", "valdoria"}, {"ines_carvalho", "occupation", "film_director"},
    {"ines_carvalho", "educated_at", "brennholm_institute"},
    {"jonah_whitfield", "place_of_birth", "dunmore"}, {"jonah_whitfield", "date_of_birth", "1977-04-01"},
    {"jonah_whitfield", "country_of_citizenship", "norland"}, {"jonah_whitfield", "occupation", "novelist"},
    {"keiko_tanaka", "place_of_birth", "brennholm"}, {"keiko_tanaka", "date_of_birth", "1968-06-18"},
    {"keiko_tanaka", "country_of_citizenship", "norland"}, {"keiko_tanaka", "occupation", "musician"},
    {"keiko_tanaka", "member_of", "glasslights"},
    {"luca_romano", "place_of_birth", "ferrovia"}, {"luca_romano", "date_of_birth", "1982-03-27"},
    {"luca_romano", "country_of_citizenship", "valdoria"}, {"luca_romano", "occupation", "actor"},
    {"luca_romano", "height", "179"},
    {"maya_okafor", "place_of_birth", "elmsgate"}, {"maya_okafor", "date_of_birth", "1985-11-23"},
    {"maya_okafor", "country_of_citizenship", "ostravia"}, {"maya_okafor", "occupation", "actor"},
    {"maya_okafor", "height", "165"},
    {"nils_berg", "place_of_birth", "cassel_bay"}, {"nils_berg", "date_of_birth", "1963-01-19"},
    {"nils_berg", "country_of_citizenship", "estmark"}, {"nils_berg", "occupation", "musician"},
    {"nils_berg", "member_of", "northern_mile"}, {"nils_berg", "spouse", "greta_lindqvist"},
    {"olivia_grant", "place_of_birth", "port_alder"}, {"olivia_grant", "date_of_birth", "1979-10-31"},
    {"olivia_grant", "country_of_citizenship", "norland"}, {"olivia_grant", "occupation", "actor"},
    {"olivia_grant", "occupation", "musician"}, {"olivia_grant", "member_of", "glasslights"},
    {"pavel_novak", "place_of_birth", "dunmore"}, {"pavel_novak", "date_of_birth", "1974-07-07"},
    {"pavel_novak", "country_of_citizenship", "norland"}, {"pavel_novak", "occupation", "actor"},
    {"pavel_novak", "member_of", "northern_mile"},

    {"salt_archive", "author", "elena_marsh"}, {"salt_archive", "publisher", "apex_publishing"},
    {"salt_archive", "publication_date", "1990-03-15"}, {"salt_archive", "page_count", "412"},
    {"salt_archive", "main_subject", "seafaring"}, {"salt_archive", "original_language", "norlandic"},
    {"river_of_small_lamps", "author", "jonah_whitfield"}, {"river_of_small_lamps", "publisher", "apex_publishing"},
    {"river_of_small_lamps", "publication_date", "2005-08-01"}, {"river_of_small_lamps", "page_count", "288"},
    {"river_of_small_lamps", "main_subject", "memory"}, {"river_of_small_lamps", "original_language", "estmarkish"},
    {"iron_and_ivy", "author", "farid_haddad"}, {"iron_and_ivy", "publisher", "apex_publishing"},
    {"iron_and_ivy", "publication_date", "2012-02-20"}, {"iron_and_ivy", "page_count", "356"},
    {"iron_and_ivy", "main_subject", "memory"}, {"iron_and_ivy", "original_language", "valdorian"},
    {"map_for_the_lost", "author", "jonah_whitfield"}, {"map_for_the_lost", "publisher", "harbor_house_books"},
    {"map_for_the_lost", "publication_date", "2001-11-11"}, {"map_for_the_lost", "page_count", "198"},
    {"map_for_the_lost", "main_subject", "seafaring"}, {"map_for_the_lost", "original_language", "norlandic"},

    {"neon_tides", "performer", "glasslights"}, {"neon_tides", "release_date", "2010-05-05"},
    {"neon_tides", "record_label", "bluestone_records"}, {"neon_tides", "number_of_tracks", "11"},
    {"quiet_machines", "performer", "northern_mile"}, {"quiet_machines", "release_date", "2014-09-19"},
    {"quiet_machines", "record_label", "bluestone_records"}, {"quiet_machines", "number_of_tracks", "9"},
    {"ember_season", "performer", "glasslights"}, {"ember_season", "release_date", "2018-03-03"},
    {"ember_season", "record_label", "bluestone_records"}, {"ember_season", "number_of_tracks", "12"},
    {"glasslights", "formation_location", "port_alder"}, {"northern_mile", "formation_location", "cassel_bay"},

    {"port_alder", "country", "norland"}, {"port_alder", "population", "812000"},
    {"port_alder", "twinned_with", "ferrovia"},
    {"brennholm", "country", "norland"}, {"brennholm", "population", "356000"},
    {"brennholm", "twinned_with", "cassel_bay"},
    {"cassel_bay", "country", "estmark"}, {"cassel_bay", "population", "221000"},
    {"cassel_bay", "twinned_with", "brennholm"},
    {"dunmore", "country", "norland"}, {"dunmore", "population", "98000"},
    {"elmsgate", "country", "ostravia"}, {"elmsgate", "population", "143000"},
    {"ferrovia", "country", "valdoria"}, {"ferrovia", "population", "1204000"},
    {"ferrovia", "twinned_with", "port_alder"},

    {"norland", "capital", "port_alder"}, {"norland", "continent", "borealis"},
    {"norland", "official_language", "norlandic"}, {"norland", "currency", "norland_crown"},
    {"valdoria", "capital", "ferrovia"}, {"valdoria", "continent", "aurelia"},
    {"valdoria", "official_language", "valdorian"}, {"valdoria", "currency", "valdorian_mark"},
    {"estmark", "capital", "cassel_bay"}, {"estmark", "continent", "borealis"},
    {"estmark", "official_language", "estmarkish"}, {"estmark", "official_language", "norlandic"},
    {"estmark", "currency", "estmark_florin"},
    {"ostravia", "capital", "elmsgate"}, {"ostravia", "continent", "aurelia"},
    {"ostravia", "official_language", "valdorian"}, {"ostravia", "currency", "norland_crown"},

    {"silverline_pictures", "headquarters_location", "port_alder"}, {"silverline_pictures", "founded_by", "alma_reyes"},
    {"silverline_pictures", "inception", "1985-02-01"}, {"silverline_pictures", "industry", "film_production"},
    {"northwind_studios", "headquarters_location", "ferrovia"}, {"northwind_studios", "founded_by", "dmitri_sokolov"},
    {"northwind_studios", "inception", "1992-06-15"}, {"northwind_studios", "industry", "film_production"},
    {"apex_publishing", "headquarters_location", "brennholm"}, {"apex_publishing", "founded_by", "jonah_whitfield"},
    {"apex_publishing", "inception", "1978-09-30"}, {"apex_publishing", "industry", "publishing"},
    {"harbor_house_books", "headquarters_location", "cassel_bay"}, {"harbor_house_books", "founded_by", "farid_haddad"},
    {"harbor_house_books", "inception", "1999-01-01"}, {"harbor_house_books", "industry", "publishing"},
    {"bluestone_records", "headquarters_location", "dunmore"}, {"bluestone_records", "founded_by", "keiko_tanaka"},
    {"bluestone_records", "inception", "2004-04-04"}, {"bluestone_records", "industry", "music"},
    {"university_of_port_alder", "located_in", "port_alder"}, {"university_of_port_alder", "established", "1847-10-01"},
    {"brennholm_institute", "located_in", "brennholm"}, {"brennholm_institute", "established", "1921-09-15"},
};

// Question phrasing per relation. {s} is the subject, {o} the object. Empty
// strings mean the form is not generated for that relation.
struct RelationDef {
    const char* pred;
    const char* subject_cls;
    const char* object;   // entity class, or "date" / "number"
    const char* forward;  // asks for the object
    const char* ask;      // yes/no about one (s, o) pair
    const char* noun;     // noun phrase naming the object, for chaining
    const char* count;    // asks for the number of objects
    const char* gt;       // class-level filter, value greater than {o}
    const char* lt;       // class-level filter, value less than {o}
};

const RelationDef kRelations[] = {
    {"directed_by", "film", "person", "Who directed {s}?", "Was {s} directed by {o}?", "the director of {s}", "", "", ""},
    {"cast_member", "film", "person", "Who acted in {s}?", "Did {o} act in {s}?", "", "How many cast members does {s} have?", "", ""},
    {"screenwriter", "film", "person", "Who wrote the screenplay of {s}?", "Did {o} write the screenplay of {s}?", "the screenwriter of {s}", "", "", ""},
    {"composer", "film", "person", "Who composed the score for {s}?", "Did {o} compose the score for {s}?", "the composer of {s}", "", "", ""},
    {"publication_date", "film", "date", "When was {s} published?", "Was {s} published on {o}?", "", "", "Which films were published after {o}?", "Which films were published before {o}?"},
    {"duration", "film", "number", "How many minutes long is {s}?", "Is {s} {o} minutes long?", "", "", "Which films run longer than {o} minutes?", "Which films run shorter than {o} minutes?"},
    {"genre", "film", "genre", "What genre is {s}?", "", "", "", "", ""},
    {"country_of_origin", "film", "country", "Which country does {s} come from?", "Does {s} come from {o}?", "the country of origin of {s}", "", "", ""},
    {"production_company", "film", "company", "Which company produced {s}?", "Was {s} produced by {o}?", "the production company of {s}", "", "", ""},
    {"original_language", "film", "language", "What is the original language of {s}?", "Is {s} originally in {o}?", "", "", "", ""},
    {"filming_location", "film", "city", "Where was {s} filmed?", "Was {s} filmed in {o}?", "the filming location of {s}", "", "", ""},
    {"award_received", "film", "award", "Which awards did {s} receive?", "", "", "How many awards did {s} receive?", "", ""},
    {"based_on", "film", "book", "Which book is {s} based on?", "Is {s} based on {o}?", "the book that {s} is based on", "", "", ""},
    {"place_of_birth", "person", "city", "Where was {s} born?", "Was {s} born in {o}?", "the birthplace of {s}", "", "", ""},
    {"date_of_birth", "person", "date", "When was {s} born?", "Was {s} born on {o}?", "", "", "Which people were born after {o}?", "Which people were born before {o}?"},
    {"country_of_citizenship", "person", "country", "Which country is {s} a citizen of?", "Is {s} a citizen of {o}?", "the country of citizenship of {s}", "", "", ""},
    {"spouse", "person", "person", "Who is {s} married to?", "Is {s} married to {o}?", "the spouse of {s}", "", "", ""},
    {"educated_at", "person", "university", "Where did {s} study?", "Did {s} study at {o}?", "the university that {s} attended", "", "", ""},
    {"occupation", "person", "occupation", "What does {s} do for a living?", "", "", "How many occupations does {s} have?", "", ""},
    {"height", "person", "number", "How tall is {s} in centimetres?", "Is {s} {o} centimetres tall?", "", "", "Which people are taller than {o} centimetres?", "Which people are shorter than {o} centimetres?"},
    {"member_of", "person", "band", "Which band is {s} a member of?", "Is {s} a member of {o}?", "the band of {s}", "", "", ""},
    {"author", "book", "person", "Who wrote {s}?", "Did {o} write {s}?", "the author of {s}", "", "", ""},
    {"publisher", "book", "company", "Who published {s}?", "Was {s} published by {o}?", "the publisher of {s}", "", "", ""},
    {"page_count", "book", "number", "How many pages does {s} have?", "Does {s} have {o} pages?", "", "", "Which books have more than {o} pages?", "Which books have fewer than {o} pages?"},
    {"main_subject", "book", "topic", "What is {s} about?", "", "", "", "", ""},
    {"country", "city", "country", "Which country is {s} in?", "Is {s} in {o}?", "the country of {s}", "", "", ""},
    {"population", "city", "number", "What is the population of {s}?", "Does {s} have a population of {o}?", "", "", "Which cities have more than {o} inhabitants?", "Which cities have fewer than {o} inhabitants?"},
    {"twinned_with", "city", "city", "Which city is {s} twinned with?", "Is {s} twinned with {o}?", "the twin city of {s}", "", "", ""},
    {"capital", "country", "city", "What is the capital of {s}?", "Is {o} the capital of {s}?", "the capital of {s}", "", "", ""},
    {"continent", "country", "continent", "Which continent is {s} on?", "Is {s} on {o}?", "", "", "", ""},
    {"official_language", "country", "language", "Which languages are official in {s}?", "Is {o} an official language of {s}?", "", "How many official languages does {s} have?", "", ""},
    {"currency", "country", "currency", "What currency does {s} use?", "", "", "", "", ""},
    {"headquarters_location", "company", "city", "Where is {s} headquartered?", "Is {s} headquartered in {o}?", "the headquarters city of {s}", "", "", ""},
    {"founded_by", "company", "person", "Who founded {s}?", "Was {s} founded by {o}?", "the founder of {s}", "", "", ""},
    {"inception", "company", "date", "When was {s} founded?", "Was {s} founded on {o}?", "", "", "", ""},
    {"industry", "company", "industry", "Which industry is {s} in?", "", "", "", "", ""},
    {"located_in", "university", "city", "Where is {s} located?", "Is {s} located in {o}?", "the city where {s} is located", "", "", ""},
    {"established", "university", "date", "When was {s} established?", "Was {s} established on {o}?", "", "", "", ""},
    {"performer", "album", "band", "Who performed {s}?", "Was {s} performed by {o}?", "the performer of {s}", "", "", ""},
    {"release_date", "album", "date", "When was {s} released?", "Was {s} released on {o}?", "", "", "Which albums were released after {o}?", "Which albums were released before {o}?"},
    {"record_label", "album", "company", "Which label released {s}?", "Was {s} released by {o}?", "the label of {s}", "", "", ""},
    {"number_of_tracks", "album", "number", "How many tracks are on {s}?", "Does {s} have {o} tracks?", "", "", "", ""},
    {"formation_location", "band", "city", "Where was {s} formed?", "Was {s} formed in {o}?", "the place where {s} was formed", "", "", ""},
};
// clang-format on

// Filter thresholds per literal relation; none coincide with a stored value.
const std::map<std::string, std::vector<std::string>> kThresholds = {
    {"publication_date", {"1990-01-01", "2000-01-01", "2010-01-01"}},
    {"duration", {"100", "120", "130"}},
    {"date_of_birth", {"1965-01-01", "1970-01-01", "1978-01-01"}},
    {"height", {"170", "175", "180"}},
    {"page_count", {"250", "300", "400"}},
    {"population", {"150000", "300000", "1000000"}},
    {"release_date", {"2012-01-01", "2016-01-01"}},
};

const std::set<std::string> kTypedClasses = {"film", "person", "book", "city", "album"};

std::string ner_type(const std::string& cls) {
    static const std::map<std::string, std::string> types = {
        {"person", "PERSON"},     {"film", "WORK_OF_ART"}, {"book", "WORK_OF_ART"}, {"album", "WORK_OF_ART"},
        {"award", "WORK_OF_ART"}, {"city", "GPE"},         {"country", "GPE"},      {"company", "ORG"},
        {"university", "ORG"},    {"band", "ORG"},         {"language", "LANGUAGE"}, {"continent", "LOC"},
        {"date", "DATE"},         {"number", "CARDINAL"}};
    auto it = types.find(cls);
    return it == types.end() ? std::string() : it->second;
}

struct World {
    std::unordered_map<std::string, const EntityDef*> entities;
    // (subject key, predicate) -> object keys or literals, in fact order
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> facts;
    std::map<std::string, std::vector<std::string>> by_class;  // class -> entity keys in table order

    World() {
        for (const auto& e : kEntities) {
            entities.emplace(e.key, &e);
            by_class[e.cls].push_back(e.key);
        }
        for (const auto& f : kFacts) facts[{f.s, f.p}].push_back(f.o);
    }

    bool is_entity(const std::string& key) const { return entities.count(key) > 0; }
    std::string name(const std::string& key) const { return entities.at(key)->name; }
    std::string cls(const std::string& key) const { return entities.at(key)->cls; }

    const std::vector<std::string>* objects(const std::string& s, const std::string& p) const {
        auto it = facts.find({s, p});
        return it == facts.end() ? nullptr : &it->second;
    }

    // Answer strings for an object: entity names or literal values.
    std::string answer(const std::string& o) const { return is_entity(o) ? name(o) : o; }
};

std::string entity_id(const std::string& key) { return "e:" + key; }
std::string class_id(const std::string& cls) { return "c:" + cls; }

struct Slot {
    std::string surface;
    std::string type;  // empty: not annotated
};

// Fills {s} and {o} in `tmpl`, recording entity spans at byte offsets.
std::pair<std::string, std::vector<EntitySpan>> fill(const std::string& tmpl, const std::optional<Slot>& s,
                                                      const std::optional<Slot>& o) {
    std::string text;
    std::vector<EntitySpan> spans;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
            const std::optional<Slot>& slot = tmpl[i + 1] == 's' ? s : o;
            if (!slot) throw Error("template slot without a value: " + tmpl);
            std::size_t start = text.size();
            text += slot->surface;
            if (!slot->type.empty()) spans.push_back({start, text.size(), slot->type, slot->surface});
            i += 2;
        } else {
            text += tmpl[i];
        }
    }
    return {text, spans};
}

std::string replace_slot(std::string tmpl, const std::string& slot, const std::string& with) {
    auto pos = tmpl.find(slot);
    if (pos == std::string::npos) throw Error("template lacks " + slot + ": " + tmpl);
    tmpl.replace(pos, slot.size(), with);
    return tmpl;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

std::string literal_term(const std::string& value, const std::string& kind) {
    return kind == "date" ? quote(value) + "^^xsd:date" : value;
}

bool is_literal_kind(const std::string& object) { return object == "date" || object == "number"; }

using Pool = std::vector<QuestionRecord>;

QuestionRecord make_record(const std::string& text, std::vector<EntitySpan> spans, std::string sparql,
                           std::set<std::string> answers, std::optional<std::string> topic) {
    QuestionRecord r;
    r.question = text;
    r.gold_sparql = std::move(sparql);
    r.answers.assign(answers.begin(), answers.end());
    r.topic_entity_id = std::move(topic);
    r.entity_annotations = std::move(spans);
    return r;
}

Slot entity_slot(const World& w, const std::string& key) { return {w.name(key), ner_type(w.cls(key))}; }

void forward_questions(const World& w, Pool& out) {
    for (const auto& rel : kRelations) {
        for (const auto& s : w.by_class.at(rel.subject_cls)) {
            auto objs = w.objects(s, rel.pred);
            if (!objs) continue;
            auto [text, spans] = fill(rel.forward, entity_slot(w, s), std::nullopt);
            std::string head = "SELECT DISTINCT ?x WHERE { ?e <pred:name> " + quote(w.name(s)) + " . ";
            std::string sparql = is_literal_kind(rel.object)
                                     ? head + "?e <" + rel.pred + "> ?x . }"
                                     : head + "?e <" + rel.pred + "> ?y . ?y <pred:name> ?x . }";
            std::set<std::string> answers;
            for (const auto& o : *objs) answers.insert(w.answer(o));
            out.push_back(make_record(text, spans, sparql, answers, entity_id(s)));
        }
    }
}

void count_questions(const World& w, Pool& out) {
    for (const auto& rel : kRelations) {
        if (!*rel.count) continue;
        for (const auto& s : w.by_class.at(rel.subject_cls)) {
            auto objs = w.objects(s, rel.pred);
            std::set<std::string> distinct;
            if (objs) distinct.insert(objs->begin(), objs->end());
            auto [text, spans] = fill(rel.count, entity_slot(w, s), std::nullopt);
            std::string sparql = "SELECT (COUNT(DISTINCT ?y) AS ?n) WHERE { ?e <pred:name> " + quote(w.name(s)) +
                                 " . ?e <" + rel.pred + "> ?y . }";
            out.push_back(make_record(text, spans, sparql, {std::to_string(distinct.size())}, entity_id(s)));
        }
    }
}

void ask_questions(const World& w, std::mt19937_64& rng, Pool& out) {
    for (const auto& rel : kRelations) {
        if (!*rel.ask) continue;
        std::vector<std::string> pool;  // possible objects
        if (is_literal_kind(rel.object)) {
            for (const auto& f : kFacts) {
                if (f.p == std::string(rel.pred)) pool.push_back(f.o);
            }
        } else {
            pool = w.by_class.at(rel.object);
        }
        for (const auto& s : w.by_class.at(rel.subject_cls)) {
            auto objs = w.objects(s, rel.pred);
            if (!objs) continue;
            std::vector<std::string> negatives;
            for (const auto& o : pool) {
                if (o != s && std::find(objs->begin(), objs->end(), o) == objs->end() &&
                    std::find(negatives.begin(), negatives.end(), o) == negatives.end()) {
                    negatives.push_back(o);
                }
            }
            std::vector<std::pair<std::string, bool>> picks = {{(*objs)[rng() % objs->size()], true}};
            if (!negatives.empty()) picks.push_back({negatives[rng() % negatives.size()], false});
            for (const auto& [o, truth] : picks) {
                Slot os = w.is_entity(o) ? entity_slot(w, o) : Slot{o, ner_type(rel.object)};
                auto [text, spans] = fill(rel.ask, entity_slot(w, s), os);
                std::string sparql = "ASK { ?e <pred:name> " + quote(w.name(s)) + " . ";
                if (is_literal_kind(rel.object)) {
                    sparql += "?e <" + std::string(rel.pred) + "> " + literal_term(o, rel.object) + " . }";
                } else {
                    sparql += "?e <" + std::string(rel.pred) + "> ?y . ?y <pred:name> " + quote(w.name(o)) + " . }";
                }
                out.push_back(make_record(text, spans, sparql, {truth ? "true" : "false"}, entity_id(s)));
            }
        }
    }
}

void two_hop_questions(const World& w, Pool& out) {
    for (const auto& first : kRelations) {
        if (!*first.noun) continue;
        for (const auto& second : kRelations) {
            if (second.subject_cls != std::string(first.object)) continue;
            std::string tmpl = replace_slot(second.forward, "{s}", first.noun);
            for (const auto& s : w.by_class.at(first.subject_cls)) {
                auto mids = w.objects(s, first.pred);
                if (!mids) continue;
                std::set<std::string> answers;
                for (const auto& m : *mids) {
                    if (auto objs = w.objects(m, second.pred)) {
                        for (const auto& o : *objs) answers.insert(w.answer(o));
                    }
                }
                if (answers.empty()) continue;
                auto [text, spans] = fill(tmpl, entity_slot(w, s), std::nullopt);
                std::string sparql = "SELECT DISTINCT ?x WHERE { ?e <pred:name> " + quote(w.name(s)) + " . ?e <" +
                                     first.pred + "> ?m . ";
                sparql += is_literal_kind(second.object)
                              ? "?m <" + std::string(second.pred) + "> ?x . }"
                              : "?m <" + std::string(second.pred) + "> ?y . ?y <pred:name> ?x . }";
                out.push_back(make_record(text, spans, sparql, answers, entity_id(s)));
            }
        }
    }
}

bool literal_greater(const std::string& a, const std::string& b, const std::string& kind) {
    if (kind == "number") return std::stoll(a) > std::stoll(b);
    return a > b;
}

void filter_questions(const World& w, Pool& out) {
    for (const auto& rel : kRelations) {
        auto th = kThresholds.find(rel.pred);
        if (th == kThresholds.end()) continue;
        for (const auto& value : th->second) {
            for (bool greater : {true, false}) {
                const char* tmpl = greater ? rel.gt : rel.lt;
                if (!*tmpl) continue;
                std::set<std::string> answers;
                for (const auto& s : w.by_class.at(rel.subject_cls)) {
                    auto objs = w.objects(s, rel.pred);
                    if (!objs) continue;
                    for (const auto& o : *objs) {
                        bool hit = greater ? literal_greater(o, value, rel.object)
                                           : literal_greater(value, o, rel.object);
                        if (hit) answers.insert(w.name(s));
                    }
                }
                if (answers.empty()) continue;
                auto [text, spans] = fill(tmpl, std::nullopt, Slot{value, ner_type(rel.object)});
                std::string sparql = "SELECT DISTINCT ?x WHERE { ?e <pred:instance_of> ?c . ?c <pred:name> " +
                                     quote(rel.subject_cls) + " . ?e <" + rel.pred + "> ?v . FILTER(?v " +
                                     (greater ? ">" : "<") + " " + literal_term(value, rel.object) +
                                     ") . ?e <pred:name> ?x . }";
                out.push_back(make_record(text, spans, sparql, answers, std::nullopt));
            }
        }
    }
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace

SyntheticBenchmark make_synthetic_benchmark(std::size_t question_count, std::uint64_t seed) {
    World w;
    std::mt19937_64 rng(seed);
    SyntheticBenchmark bench;

    // Triples: names, class membership for the queryable classes, facts.
    for (const auto& cls : kTypedClasses) {
        bench.triples.push_back({class_id(cls), "pred:name", Node{NodeKind::string, cls}});
    }
    for (const auto& e : kEntities) {
        bench.triples.push_back({entity_id(e.key), "pred:name", Node{literal_kind_by_shape(e.name), e.name}});
        if (kTypedClasses.count(e.cls)) {
            bench.triples.push_back({entity_id(e.key), "pred:instance_of", Node{NodeKind::entity, class_id(e.cls)}});
        }
        auto type = ner_type(e.cls);
        if (!type.empty()) bench.lexicon.emplace(e.name, type);
    }
    for (const auto& f : kFacts) {
        Node o = w.is_entity(f.o) ? Node{NodeKind::entity, entity_id(f.o)} : Node{literal_kind_by_shape(f.o), f.o};
        bench.triples.push_back({entity_id(f.s), f.p, o});
    }

    // Question families and their share of the benchmark.
    std::vector<Pool> families(5);
    forward_questions(w, families[0]);
    two_hop_questions(w, families[1]);
    ask_questions(w, rng, families[2]);
    count_questions(w, families[3]);
    filter_questions(w, families[4]);
    const double share[5] = {0.36, 0.26, 0.22, 0.08, 0.08};

    std::vector<QuestionRecord> chosen;
    std::set<std::string> seen;
    std::vector<std::size_t> cursor(families.size(), 0);
    for (auto& f : families) shuffle(f, rng);
    auto take = [&](std::size_t fam) {
        auto& pool = families[fam];
        while (cursor[fam] < pool.size()) {
            auto& r = pool[cursor[fam]++];
            if (seen.insert(r.question).second) {
                chosen.push_back(r);
                return true;
            }
        }
        return false;
    };
    for (std::size_t fam = 0; fam < families.size(); ++fam) {
        auto quota = static_cast<std::size_t>(share[fam] * static_cast<double>(question_count));
        for (std::size_t i = 0; i < quota && chosen.size() < question_count && take(fam);) ++i;
    }
    // Top up round-robin when a family ran short.
    for (bool progressed = true; chosen.size() < question_count && progressed;) {
        progressed = false;
        for (std::size_t fam = 0; fam < families.size() && chosen.size() < question_count; ++fam) {
            progressed |= take(fam);
        }
    }
    if (chosen.size() < question_count) {
        throw ConfigError("synthetic world supports only " + std::to_string(chosen.size()) + " distinct questions");
    }

    shuffle(chosen, rng);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "syn-%04zu", i + 1);
        chosen[i].id = id;
    }
    bench.corpus = Corpus(std::move(chosen), "synthetic");
    return bench;
}

std::string serialize_kb(const std::vector<Triple>& triples) {
    std::string out = "# subject\tpredicate\tobject (quoted objects are literals)\n";
    for (const auto& t : triples) out += t.subject + "\t" + t.predicate + "\t" + format_object(t.object) + "\n";
    return out;
}

std::string serialize_lexicon(const Lexicon& lexicon) {
    std::string out = "# surface\tentity type\n";
    for (const auto& [surface, type] : lexicon) out += surface + "\t" + type + "\n";
    return out;
}

void write_synthetic(const SyntheticBenchmark& bench, const std::filesystem::path& dir) {
    write_file(dir / "kb.tsv", serialize_kb(bench.triples));
    write_file(dir / "benchmark.jsonl", serialize_corpus(bench.corpus));
    write_file(dir / "lexicon.tsv", serialize_lexicon(bench.lexicon));
}

}  // namespace icsu
