#include "storebench/fixtures.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

namespace storebench {

namespace {

std::string axis_key(const std::vector<std::pair<std::string, std::string>>& options) {
    std::string key;
    for (const auto& [dim, value] : options) {
        key += slugify(value);
        key += '-';
    }
    if (!key.empty()) key.pop_back();
    return key;
}

/// Cartesian product of the given axes; every variant gets `price`.
Product variant_product(std::string handle, std::string title, std::string vendor, std::string product_type,
                        std::vector<std::pair<std::string, std::vector<std::string>>> axes, Money price,
                        std::int64_t created_ordinal) {
    Product p;
    p.handle = std::move(handle);
    p.title = std::move(title);
    p.vendor = std::move(vendor);
    p.product_type = std::move(product_type);
    p.description = p.title + " from " + p.vendor + ".";
    p.created_ordinal = created_ordinal;
    p.images = {"/assets/" + p.handle + ".jpg"};
    std::vector<std::vector<std::pair<std::string, std::string>>> combos{{}};
    for (const auto& [dim, values] : axes) {
        p.option_axes.push_back(dim);
        std::vector<std::vector<std::pair<std::string, std::string>>> next;
        for (const auto& combo : combos) {
            for (const auto& value : values) {
                auto extended = combo;
                extended.emplace_back(dim, value);
                next.push_back(std::move(extended));
            }
        }
        combos = std::move(next);
    }
    for (const auto& combo : combos) {
        Variant v;
        v.id = combo.empty() ? p.handle + "-default" : p.handle + "-" + axis_key(combo);
        v.options = combo;
        v.price = price;
        v.available = true;
        p.variants.push_back(std::move(v));
    }
    p.price_min = p.price_max = price;
    return p;
}

void set_compare_at(Product& p, Money compare_at) {
    for (auto& v : p.variants) {
        v.compare_at_price = compare_at;
    }
}

void refresh_price_bounds(Product& p) {
    p.price_min = p.price_max = p.variants.front().price;
    for (const auto& v : p.variants) {
        p.price_min = std::min(p.price_min, v.price);
        p.price_max = std::max(p.price_max, v.price);
    }
}

Collection make_collection(std::string handle, std::string title, std::vector<std::string> handles) {
    Collection c;
    c.handle = std::move(handle);
    c.title = std::move(title);
    c.description = "Products in " + c.title + ".";
    c.product_handles = std::move(handles);
    return c;
}

PageDoc make_page(std::string handle, std::string title, PageKind kind, std::string body) {
    return PageDoc{std::move(handle), std::move(title), std::move(body), kind};
}

Money usd(std::int64_t dollars, std::int64_t cents = 0) { return Money::from_cents(dollars * 100 + cents); }

std::vector<std::string> handles_of(const std::vector<Product>& products) {
    std::vector<std::string> out;
    for (const auto& p : products) out.push_back(p.handle);
    return out;
}

ShopBundle cookware_shop() {
    std::vector<Product> products;
    std::int64_t ordinal = 0;
    std::vector<std::string> cookware;

    for (const std::string line : {"Hybrid", "Classic", "Pro"}) {
        for (int size : {8, 10, 12}) {
            const std::string handle = slugify(line) + "-fry-pan-" + std::to_string(size) + "-in";
            auto p = variant_product(handle, line + " Fry Pan " + std::to_string(size) + " in", "Hexwell", "Frying Pan",
                                     {}, usd(59 + size * 5, 99), ++ordinal);
            if (line == "Hybrid" && size == 10) set_compare_at(p, usd(129, 99));
            cookware.push_back(p.handle);
            products.push_back(std::move(p));
        }
    }
    for (const std::string kind : {"Saute Pan", "Stock Pot", "Saucepan"}) {
        for (int quarts : {2, 4, 6}) {
            auto p = variant_product(slugify(kind) + "-" + std::to_string(quarts) + "-qt",
                                     kind + " " + std::to_string(quarts) + " qt", "Hexwell", kind, {},
                                     usd(89 + quarts * 10), ++ordinal);
            cookware.push_back(p.handle);
            products.push_back(std::move(p));
        }
    }
    for (const std::string size : {"5 qt", "7 qt"}) {
        auto p = variant_product("dutch-oven-" + slugify(size), "Enameled Dutch Oven " + size, "Forge & Co",
                                 "Dutch Oven", {{"Color", {"Black", "Cream", "Sage"}}}, usd(199), ++ordinal);
        p.variants[2].available = false;
        cookware.push_back(p.handle);
        products.push_back(std::move(p));
    }
    for (const std::string name : {"Hybrid Wok 14 in", "Carbon Steel Wok 12 in"}) {
        auto p = variant_product(slugify(name), name, name.starts_with("Hybrid") ? "Hexwell" : "Forge & Co", "Wok", {},
                                 usd(149), ++ordinal);
        cookware.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("hybrid-cookware-set", "Hybrid Cookware Set", "Hexwell", "Cookware Set",
                                 {{"Size", {"6-Piece", "10-Piece"}}}, usd(399), ++ordinal);
        p.variants[1].price = usd(699);
        p.variants[1].compare_at_price = usd(899);
        refresh_price_bounds(p);
        p.best_selling_rank = 1;
        p.reviews = {{"Dana", 5, "Worth it", "Heats evenly and cleans up fast."},
                     {"Sam", 4, "Great set", "Heavy but excellent."}};
        cookware.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("cast-iron-griddle", "Cast Iron Griddle", "Forge & Co", "Griddle", {}, usd(79),
                                 ++ordinal);
        cookware.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("hybrid-grill-pan", "Hybrid Grill Pan", "Hexwell", "Griddle", {}, usd(119),
                                 ++ordinal);
        set_compare_at(p, usd(149));
        cookware.push_back(p.handle);
        products.push_back(std::move(p));
    }

    std::vector<std::string> knives;
    {
        auto p = variant_product("chefs-knife-8-in", "Chef's Knife 8 in", "Blade & Ember", "Chef's Knife",
                                 {{"Color", {"Black Handle", "Natural Wood Handle"}}}, usd(59, 99), ++ordinal);
        p.best_selling_rank = 2;
        p.reviews = {{"Ari", 5, "Sharp", "Holds an edge for months."}};
        knives.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("santoku-knife-7-in", "Santoku Knife 7 in", "Blade & Ember", "Santoku Knife",
                                 {{"Color", {"Black Handle", "Natural Wood Handle"}}}, usd(69, 99), ++ordinal);
        knives.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("paring-knife", "Paring Knife", "Blade & Ember", "Paring Knife", {}, usd(29, 99),
                                 ++ordinal);
        knives.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("bread-knife", "Bread Knife", "Blade & Ember", "Bread Knife", {}, usd(49, 99),
                                 ++ordinal);
        set_compare_at(p, usd(64, 99));
        knives.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("knife-block-set", "Knife Block Set", "Blade & Ember", "Knife Set", {}, usd(249),
                                 ++ordinal);
        knives.push_back(p.handle);
        products.push_back(std::move(p));
    }

    std::vector<std::string> apparel;
    {
        auto p = variant_product("chef-apron", "Chef Apron", "Hexwell Studio", "Apron",
                                 {{"Size", {"S", "M", "L"}}, {"Color", {"Black", "Navy"}}}, usd(39), ++ordinal);
        apparel.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("logo-tee", "Logo Tee", "Hexwell Studio", "T-Shirt",
                                 {{"Size", {"XS", "S", "M", "L", "XL", "XXL"}}}, usd(28), ++ordinal);
        apparel.push_back(p.handle);
        products.push_back(std::move(p));
    }

    std::vector<std::string> tools;
    {
        auto p = variant_product("silicone-spatula", "Silicone Spatula", "Kitchen Co", "Utensil",
                                 {{"Color", {"Red", "Black", "Sage"}}}, usd(14), ++ordinal);
        tools.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("pan-protectors", "Pan Protectors", "Kitchen Co", "Pan Protector", {}, usd(0, 98),
                                 ++ordinal);
        p.variants[0].available = false;
        tools.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("seasoning-trio", "Seasoning Trio", "Kitchen Co", "Seasoning", {}, usd(24),
                                 ++ordinal);
        p.status = ProductStatus::inactive;
        tools.push_back(p.handle);
        products.push_back(std::move(p));
    }
    tools.push_back("paring-knife");

    {
        auto p = variant_product("gift-card", "Gift Card", "Hexwell", "Gift Card",
                                 {{"Denomination", {"$25", "$50", "$100"}}}, usd(25), ++ordinal);
        p.gift_card = true;
        p.variants[1].price = usd(50);
        p.variants[2].price = usd(100);
        refresh_price_bounds(p);
        products.push_back(std::move(p));
    }

    std::vector<std::string> on_sale;
    for (const auto& p : products) {
        if (p.any_on_sale()) on_sale.push_back(p.handle);
    }

    std::vector<Collection> collections;
    collections.push_back(make_collection("cookware", "Cookware", cookware));
    collections.push_back(make_collection("knives", "Knives", knives));
    collections.push_back(make_collection("kitchen-tools", "Kitchen Tools", tools));
    collections.push_back(make_collection("apparel", "Apparel", apparel));
    collections.push_back(make_collection("dutch-ovens", "Dutch Ovens", {"dutch-oven-5-qt", "dutch-oven-7-qt"}));
    collections.push_back(
        make_collection("gifts", "Gifts", {"gift-card", "knife-block-set", "hybrid-cookware-set", "chef-apron"}));
    collections.push_back(make_collection("best-sellers", "Best Sellers",
                                          {"hybrid-cookware-set", "chefs-knife-8-in", "hybrid-fry-pan-10-in",
                                           "santoku-knife-7-in", "hybrid-wok-14-in", "chef-apron"}));
    collections.push_back(make_collection("sale", "Sale", on_sale));
    collections.push_back(make_collection("all", "All Products", handles_of(products)));

    std::vector<PageDoc> pages{
        make_page("shipping-policy", "Shipping Policy", PageKind::native_policy,
                  "Orders ship within two business days. Free shipping on orders over $75."),
        make_page("refund-policy", "Refund Policy", PageKind::native_policy,
                  "Returns are accepted within 30 days of delivery for a full refund."),
        make_page("privacy-policy", "Privacy Policy", PageKind::native_policy,
                  "We collect only the data needed to fulfil orders."),
        make_page("return-policy", "Returns and Exchanges", PageKind::custom_page,
                  "Start a return or exchange from this page within 30 days."),
        make_page("terms-of-service", "Terms of Service", PageKind::custom_page, "Use of this store is subject to these terms."),
        make_page("contact", "Contact", PageKind::custom_page, "Reach our support team any time."),
        make_page("faq", "FAQ", PageKind::custom_page, "Products and Usage. Orders. Contact. Warranty."),
        make_page("about-us", "About Us", PageKind::custom_page, "Chef-endorsed cookware built to last."),
    };

    Capabilities caps = default_capabilities("Premium hybrid cookware and kitchen accessories shop", "Cookware / Kitchen");
    caps.shop.tone = {"premium", "bold", "chef-endorsed", "direct-to-consumer"};
    caps.shop.name = "Mock Cookware";
    caps.site_shell.header_style = "two-row sticky";
    caps.site_shell.nav_depth = 2;
    caps.site_shell.footer_groups = 3;
    caps.homepage.section_types = {"hero_video",           "category_chip_slider", "featured_product_grid",
                                   "specialty_product_banner", "video_endorsement", "feature_cards_grid",
                                   "reviews_banner",       "product_carousel",     "product_hero_quote",
                                   "ugc_video_carousel",   "category_banners_3up", "culinary_council",
                                   "recipe_carousel",      "article_carousel",     "founder_message",
                                   "newsletter_inline"};
    caps.homepage.section_count = 16;
    caps.info_pages_present = {"shipping-policy", "refund-policy", "privacy-policy", "terms-of-service",
                               "contact",         "faq",           "about-us"};
    return make_bundle("mock_cookware", std::move(products), std::move(collections), std::move(pages), std::move(caps));
}

ShopBundle clothing_shop() {
    std::vector<Product> products;
    std::int64_t ordinal = 0;
    std::vector<std::string> frost;
    std::vector<std::string> drops;
    std::vector<std::string> run_club;
    std::vector<std::string> accessories;

    const std::vector<std::string> sizes{"XS", "S", "M", "L", "XL"};
    struct Item {
        std::string title;
        std::string type;
        std::vector<std::string> colors;
        int price;
        std::vector<std::string>* collection;
    };
    const std::vector<Item> items{
        {"Frost Parka", "Jacket", {"Black", "Ice Blue"}, 189, &frost},
        {"Frost Beanie", "Hat", {"Grey", "Ice Blue"}, 29, &frost},
        {"Thermal Base Layer", "Top", {"Black", "Grey"}, 59, &frost},
        {"Fleece Quarter Zip", "Top", {"Oatmeal", "Forest"}, 79, &frost},
        {"Insulated Vest", "Jacket", {"Navy"}, 119, &frost},
        {"Everyday Crew", "Top", {"White", "Black"}, 35, &drops},
        {"Relaxed Chino", "Pants", {"Khaki", "Olive"}, 69, &drops},
        {"Linen Shirt", "Top", {"Sand", "White"}, 65, &drops},
        {"Pleated Skirt", "Skirt", {"Black", "Plum"}, 72, &drops},
        {"Run Club Tank", "Top", {"Volt", "Black"}, 32, &run_club},
        {"Run Club Short", "Shorts", {"Black", "Navy"}, 45, &run_club},
        {"Run Club Tight", "Pants", {"Black"}, 68, &run_club},
        {"Half Zip Runner", "Top", {"Coral", "Navy"}, 74, &run_club},
    };
    for (const auto& item : items) {
        auto p = variant_product(slugify(item.title), item.title, "Mock Clothing", item.type,
                                 {{"Size", sizes}, {"Color", item.colors}}, usd(item.price), ++ordinal);
        if (item.title == "Frost Parka") set_compare_at(p, usd(229));
        if (item.title == "Pleated Skirt") {
            for (auto& v : p.variants) v.available = false;
        }
        item.collection->push_back(p.handle);
        products.push_back(std::move(p));
    }
    for (const auto& [title, colors] : std::vector<std::pair<std::string, std::vector<std::string>>>{
             {"Velvet Scrunchie", {"Black", "Rose"}}, {"Logo Cap", {"Black", "Stone"}}, {"Canvas Tote", {}}}) {
        std::vector<std::pair<std::string, std::vector<std::string>>> axes;
        if (!colors.empty()) axes.push_back({"Color", colors});
        auto p = variant_product(slugify(title), title, "Mock Clothing", "Accessory", axes, usd(18), ++ordinal);
        accessories.push_back(p.handle);
        drops.push_back(p.handle);
        products.push_back(std::move(p));
    }
    {
        auto p = variant_product("mock-clothing-gift-card", "Mock Clothing Gift Card", "Mock Clothing", "Gift Card",
                                 {{"Denomination", {"$25", "$50"}}}, usd(25), ++ordinal);
        p.gift_card = true;
        p.variants[1].price = usd(50);
        refresh_price_bounds(p);
        products.push_back(std::move(p));
    }

    std::vector<Collection> collections{
        make_collection("frost-season-collection", "Frost Season Collection", frost),
        make_collection("fresh-drops", "Fresh Drops", drops),
        make_collection("womens-run-club", "Womens Run Club", run_club),
        make_collection("accessories", "Accessories", accessories),
        make_collection("all", "All", handles_of(products)),
    };
    std::vector<PageDoc> pages{
        make_page("shipping-policy", "Shipping Policy", PageKind::native_policy, "Standard delivery in 3-5 days."),
        make_page("refund-policy", "Refund Policy", PageKind::native_policy, "Refunds within 30 days."),
        make_page("return-policy", "Return Policy", PageKind::custom_page, "Easy returns within 30 days."),
        make_page("about", "About Us", PageKind::custom_page, "Lifestyle apparel for every season."),
        make_page("contact", "Contact", PageKind::custom_page, "Write to us any time."),
    };
    Capabilities caps = default_capabilities("Lifestyle apparel shop", "Apparel");
    caps.shop.name = "Mock Clothing";
    caps.homepage.section_types = {"hero_image", "featured_product_grid", "category_banners_3up", "newsletter_inline"};
    caps.homepage.section_count = 4;
    caps.info_pages_present = {"shipping-policy", "refund-policy", "about", "contact"};
    return make_bundle("mock_clothing", std::move(products), std::move(collections), std::move(pages), std::move(caps));
}

ShopBundle tiny_shop() {
    std::vector<Product> products{
        simple_product("anvil-pro", "Anvil Pro", "Forgeworks", "Anvil", usd(120), 1),
        simple_product("hammer-classic", "Classic Hammer", "Forgeworks", "Hammer", usd(35), 2),
        simple_product("tongs", "Forge Tongs", "Ironside", "Tongs", usd(22, 50), 3),
    };
    std::vector<Collection> collections{
        make_collection("essentials", "Essentials", {"anvil-pro", "hammer-classic", "tongs"}),
        make_collection("starter-kit", "Starter Kit", {"hammer-classic"}),
    };
    std::vector<PageDoc> pages{
        make_page("shipping-policy", "Shipping Policy", PageKind::native_policy, "Ships in 2 days."),
        make_page("refund-policy", "Refund Policy", PageKind::native_policy, "30-day refunds."),
        make_page("contact", "Contact", PageKind::custom_page, "Say hello."),
        make_page("about-us", "About Us", PageKind::custom_page, "A small smithy."),
    };
    Capabilities caps = default_capabilities("Blacksmith tools", "Tools");
    caps.homepage.section_types = {"hero_image", "product_carousel"};
    caps.homepage.section_count = 2;
    caps.info_pages_present = {"shipping-policy", "refund-policy", "contact", "about-us"};
    return make_bundle("tiny", std::move(products), std::move(collections), std::move(pages), std::move(caps));
}

}  // namespace

Product simple_product(std::string handle, std::string title, std::string vendor, std::string product_type,
                       Money price, std::int64_t created_ordinal) {
    return variant_product(std::move(handle), std::move(title), std::move(vendor), std::move(product_type), {}, price,
                           created_ordinal);
}

ShopBundle make_bundle(std::string shop_slug, std::vector<Product> products, std::vector<Collection> collections,
                       std::vector<PageDoc> pages, Capabilities capabilities) {
    ShopBundle bundle(std::move(shop_slug), std::move(products), std::move(collections), std::move(pages),
                      std::move(capabilities), ShopStats{});
    bundle.set_stats(compute_stats(bundle));
    bundle.verify();
    return bundle;
}

Capabilities default_capabilities(std::string descriptor, std::string category) {
    Capabilities caps;
    caps.shop.descriptor = std::move(descriptor);
    caps.shop.category = std::move(category);
    caps.shop.currency = "USD";
    caps.shop.tone = {"friendly"};
    caps.site_shell.has_announcement_bar = true;
    caps.site_shell.header_style = "single-row sticky";
    caps.site_shell.nav_depth = 1;
    caps.site_shell.footer_groups = 3;
    caps.collection.filters = {"availability", "on_sale"};
    caps.collection.sort = {"featured",          "best_selling", "alphabetically_az", "alphabetically_za",
                            "price_asc",         "price_desc",   "date_new",          "date_old"};
    caps.collection.pagination = "load_more";
    caps.product.gallery_style = "horizontal_carousel_with_prev_next";
    caps.product.variant_selectors = {"radio_buttons"};
    caps.product.description_layout = "inline";
    caps.product.has_reviews = true;
    caps.product.has_recommendations = true;
    caps.cart.type = "drawer";
    caps.cart.has_upsells = false;
    caps.search.trigger = "icon_button";
    caps.search.has_predictive = true;
    caps.search.predictive_types = {"suggested_queries", "collection_shortcuts"};
    caps.floating.has_cookie_banner = true;
    return caps;
}

std::vector<std::string> fixture_names() { return {"mock_cookware", "mock_clothing", "tiny"}; }

ShopBundle fixture_shop(std::string_view name) {
    if (name == "mock_cookware") return cookware_shop();
    if (name == "mock_clothing") return clothing_shop();
    if (name == "tiny") return tiny_shop();
    throw std::invalid_argument("unknown fixture shop '" + std::string(name) + "'");
}

ShopBundle random_bundle(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto chance = [&](int percent) { return static_cast<int>(rng() % 100) < percent; };

    const std::vector<std::string> vendors{"Acme", "Northwind", "Globex", "Initech", ""};
    const std::vector<std::string> types{"Shirt", "Mug", "Lamp", "Chair", "Kettle", "Towel", ""};
    const std::vector<std::pair<std::string, std::vector<std::string>>> axes{
        {"Color", {"Black", "White", "Red", "Blue", "Green"}},
        {"Size", {"S", "M", "L", "XL"}},
        {"Material", {"Cotton", "Wool", "Steel", "Oak"}},
        {"Style", {"Modern", "Classic"}},
        {"Finish", {"Matte", "Gloss"}},
    };
    const std::vector<std::string> nouns{"Ember", "Harbor", "Summit", "Meadow", "Drift", "Canyon", "Aurora", "Slate"};

    const std::size_t product_count = 3 + pick(38);
    std::vector<Product> products;
    for (std::size_t i = 0; i < product_count; ++i) {
        Product p;
        p.handle = "item-" + std::to_string(i + 1);
        p.title = nouns[pick(nouns.size())] + " " + nouns[pick(nouns.size())] + " " + std::to_string(i + 1);
        p.vendor = vendors[pick(vendors.size())];
        p.product_type = types[pick(types.size())];
        p.created_ordinal = static_cast<std::int64_t>(pick(1000));
        p.status = chance(12) ? ProductStatus::inactive : ProductStatus::active;
        p.gift_card = chance(6);
        std::vector<std::pair<std::string, std::vector<std::string>>> chosen;
        if (p.gift_card) {
            chosen.push_back({"Denomination", {"$10", "$25"}});
        } else {
            for (const auto& axis : axes) {
                if (chance(30)) {
                    std::vector<std::string> values;
                    for (const auto& v : axis.second) {
                        if (chance(50)) values.push_back(v);
                    }
                    if (values.empty()) values.push_back(axis.second[pick(axis.second.size())]);
                    chosen.push_back({axis.first, values});
                }
            }
        }
        const Money base = Money::from_cents(100 + static_cast<std::int64_t>(pick(50000)));
        p = variant_product(p.handle, p.title, p.vendor, p.product_type, chosen, base, p.created_ordinal);
        p.status = chance(12) ? ProductStatus::inactive : ProductStatus::active;
        if (!chosen.empty() && chosen.front().first == "Denomination") p.gift_card = true;
        for (auto& v : p.variants) {
            v.price = Money::from_cents(base.cents() + static_cast<std::int64_t>(pick(3)) * 500);
            v.available = !chance(25);
            if (chance(20)) v.compare_at_price = v.price + Money::from_cents(100 + static_cast<std::int64_t>(pick(2000)));
        }
        refresh_price_bounds(p);
        if (chance(30)) p.best_selling_rank = static_cast<std::int64_t>(pick(50));
        products.push_back(std::move(p));
    }

    const std::vector<std::string> collection_names{"all",     "sale",        "featured", "best-sellers",
                                                    "spring",  "living-room", "outdoor",  "workshop",
                                                    "kitchen", "gift-ideas",  "new-in",   "essentials"};
    std::vector<Collection> collections;
    const std::size_t collection_count = 1 + pick(8);
    std::set<std::string> used;
    for (std::size_t i = 0; i < collection_count; ++i) {
        const auto& name = collection_names[pick(collection_names.size())];
        if (!used.insert(name).second) continue;
        std::vector<std::string> members;
        for (const auto& p : products) {
            if (chance(40)) members.push_back(p.handle);
        }
        std::string title = name;
        title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
        std::replace(title.begin(), title.end(), '-', ' ');
        collections.push_back(make_collection(name, title, std::move(members)));
    }

    const std::vector<PageDoc> page_pool{
        make_page("shipping-policy", "Shipping Policy", PageKind::native_policy, "Shipping terms."),
        make_page("refund-policy", "Refund Policy", PageKind::native_policy, "Refund terms."),
        make_page("privacy-policy", "Privacy Policy", PageKind::native_policy, "Privacy terms."),
        make_page("delivery-faq", "Delivery FAQ", PageKind::custom_page, "Delivery questions."),
        make_page("returns", "Returns", PageKind::custom_page, "How to return."),
        make_page("exchange-program", "Exchange Program", PageKind::custom_page, "Swap sizes."),
        make_page("about-us", "About Us", PageKind::custom_page, "Our story."),
        make_page("contact", "Contact", PageKind::custom_page, "Get in touch."),
    };
    std::vector<PageDoc> pages;
    for (const auto& page : page_pool) {
        if (chance(50)) pages.push_back(page);
    }

    Capabilities caps = default_capabilities("Randomized test shop", "General");
    caps.homepage.section_types = {"hero_image", "product_carousel", "category_chip_slider"};
    caps.homepage.section_count = 3;
    for (const auto& page : pages) {
        if (chance(70)) caps.info_pages_present.push_back(page.handle);
    }
    caps.site_shell.footer_groups = 1 + static_cast<int>(pick(3));
    return make_bundle("rand_" + std::to_string(seed), std::move(products), std::move(collections), std::move(pages),
                       std::move(caps));
}

}  // namespace storebench
