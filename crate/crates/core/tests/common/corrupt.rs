//! SampleWH with exactly one defect each.

use xolap_core::sample::sample_warehouse;
use xolap_core::store::WarehouseFiles;

pub struct Defect {
    pub name: &'static str,
    pub document: &'static str,
    find: &'static str,
    replace: &'static str,
    /// Substring of the diagnostic path that locates the defect.
    pub location: &'static str,
    /// Substring of the diagnostic message.
    pub message: &'static str,
}

impl Defect {
    pub fn apply(&self) -> WarehouseFiles {
        let mut files = sample_warehouse();
        let text = files.get(self.document).unwrap();
        assert_eq!(text.matches(self.find).count(), 1, "{}: ambiguous or missing anchor", self.name);
        let text = text.replacen(self.find, self.replace, 1);
        files.insert(self.document, text);
        files
    }
}

const MODEL: &str = "dw-model.xml";
const DATE: &str = "dimension_date.xml";
const PRODUCT: &str = "dimension_product.xml";
const FACTS: &str = "facts.xml";

pub const CORPUS: &[Defect] = &[
    Defect {
        name: "dangling fact reference",
        document: FACTS,
        find: r#"<measure name="amount" value="40"/>
    <dimension idref="d_date" value-id="d3"/>
    <dimension idref="d_product" value-id="p3"/>"#,
        replace: r#"<measure name="amount" value="40"/>
    <dimension idref="d_date" value-id="d3"/>
    <dimension idref="d_product" value-id="p9"/>"#,
        location: "fact[4]/dimension[@idref='d_product']",
        message: "no member 'p9'",
    },
    Defect {
        name: "fact measure not a number",
        document: FACTS,
        find: r#"value="30""#,
        replace: r#"value="thirty""#,
        location: "fact[3]/measure[@name='amount']",
        message: "thirty",
    },
    Defect {
        name: "fact without its measure",
        document: FACTS,
        find: "    <measure name=\"amount\" value=\"50\"/>\n",
        replace: "",
        location: "fact[5]",
        message: "amount",
    },
    Defect {
        name: "fact refers to an unlinked dimension",
        document: FACTS,
        find: r#"<dimension idref="d_store" value-id="s2"/>
  </fact>
</FactDoc>"#,
        replace: r#"<dimension idref="d_store" value-id="s2"/>
    <dimension idref="d_weather" value-id="sunny"/>
  </fact>
</FactDoc>"#,
        location: "fact[5]/dimension[@idref='d_weather']",
        message: "d_weather",
    },
    Defect {
        name: "fact document id differs from the schema",
        document: FACTS,
        find: r#"<FactDoc id="sales">"#,
        replace: r#"<FactDoc id="orders">"#,
        location: "/FactDoc[@id='orders']",
        message: "must be 'sales'",
    },
    Defect {
        name: "duplicate member id",
        document: DATE,
        find: r#"<instance id="d2">"#,
        replace: r#"<instance id="d1">"#,
        location: "instance[@id='d1']",
        message: "duplicate",
    },
    Defect {
        name: "parent names a missing member",
        document: DATE,
        find: r#"<parent level="year" idref="2007"/>
    </instance>
    <instance id="Feb">"#,
        replace: r#"<parent level="year" idref="2006"/>
    </instance>
    <instance id="Feb">"#,
        location: "Level[@id='month']/instance[@id='Jan']",
        message: "2006",
    },
    Defect {
        name: "parent at the member's own level",
        document: PRODUCT,
        find: r#"<parent level="category" idref="catB"/>"#,
        replace: r#"<parent level="item" idref="p1"/>"#,
        location: "instance[@id='p3']/parent",
        message: "coarser",
    },
    Defect {
        name: "parent level attribute disagrees with the parent",
        document: DATE,
        find: r#"<attribute name="day_num" value="2"/>
      <parent level="month" idref="Feb"/>"#,
        replace: r#"<attribute name="day_num" value="2"/>
      <parent level="year" idref="Feb"/>"#,
        location: "Level[@id='day']/instance[@id='d4']",
        message: "Feb",
    },
    Defect {
        name: "member without its key attribute",
        document: PRODUCT,
        find: r#"<attribute name="name" value="Pencil"/>"#,
        replace: "",
        location: "instance[@id='p2']",
        message: "name",
    },
    Defect {
        name: "attribute value of the wrong type",
        document: DATE,
        find: r#"<attribute name="day_num" value="1"/>
      <parent level="month" idref="Jan"/>"#,
        replace: r#"<attribute name="day_num" value="one"/>
      <parent level="month" idref="Jan"/>"#,
        location: "instance[@id='d1']/attribute[@name='day_num']",
        message: "one",
    },
    Defect {
        name: "undeclared attribute",
        document: PRODUCT,
        find: r#"<attribute name="name" value="Paper"/>"#,
        replace: r#"<attribute name="name" value="Paper"/>
      <attribute name="colour" value="white"/>"#,
        location: "instance[@id='p3']/attribute[@name='colour']",
        message: "colour",
    },
    Defect {
        name: "level missing from the schema",
        document: DATE,
        find: r#"<Level id="year">"#,
        replace: r#"<Level id="decade">"#,
        location: "Level[@id='decade']",
        message: "decade",
    },
    Defect {
        name: "reserved member id",
        document: PRODUCT,
        find: r#"  </Level>
</dimension>"#,
        replace: r#"    <instance id="__unknown__">
      <attribute name="name" value="Other"/>
    </instance>
  </Level>
</dimension>"#,
        location: "instance[@id='__unknown__']",
        message: "reserved",
    },
    Defect {
        name: "schema links an undeclared dimension",
        document: MODEL,
        find: r#"<dimension idref="d_store"/>"#,
        replace: r#"<dimension idref="d_shop"/>"#,
        location: "FactDoc[@id='sales']",
        message: "d_shop",
    },
    Defect {
        name: "schema level depths leave a gap",
        document: MODEL,
        find: r#"<Level id="year" depth="3">"#,
        replace: r#"<Level id="year" depth="4">"#,
        location: "dimension[@id='d_date']",
        message: "depth",
    },
    Defect {
        name: "schema level with two keys",
        document: MODEL,
        find: r#"<attribute name="month_num" type="integer" key="false"/>"#,
        replace: r#"<attribute name="month_num" type="integer" key="true"/>"#,
        location: "Level[@id='month']",
        message: "key",
    },
    Defect {
        name: "schema measure with an unknown aggregate",
        document: MODEL,
        find: r#"aggregate="sum""#,
        replace: r#"aggregate="median""#,
        location: "measure[@name='amount']",
        message: "median",
    },
    Defect {
        name: "schema attribute with an unknown type",
        document: MODEL,
        find: r#"<attribute name="price" type="decimal" key="false"/>"#,
        replace: r#"<attribute name="price" type="money" key="false"/>"#,
        location: "attribute[@name='price']",
        message: "money",
    },
    Defect {
        name: "schema measure declared twice",
        document: MODEL,
        find: r#"<measure name="amount" type="integer" aggregate="sum"/>"#,
        replace: r#"<measure name="amount" type="integer" aggregate="sum"/>
    <measure name="amount" type="decimal" aggregate="max"/>"#,
        location: "measure[@name='amount']",
        message: "amount",
    },
];
